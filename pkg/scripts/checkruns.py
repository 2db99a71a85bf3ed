'''
This script lists the run manifests under the output directory.
'''
import os
import sys
from glob import glob

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.interface.batch_run import resolve_output_dir
from src.interface.config import MANIFEST_SUFFIX
from src.interface.manifest import load_manifest

output_dir = resolve_output_dir(sys.argv[1] if len(sys.argv) > 1 else None)
paths = sorted(glob(os.path.join(output_dir, "**", f"*{MANIFEST_SUFFIX}"), recursive=True))

print(f"Run manifests in {output_dir}:")

for path in paths:
    m = load_manifest(path)
    mark = "✅" if m.exit_status == 0 else "❌"
    print(f"  {mark} {m.subcommand} [{m.run_id[:12]}] exit {m.exit_status}, {m.wall_time:.2f}s ({os.path.relpath(path, output_dir)})")
