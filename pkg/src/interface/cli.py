"""
Command line for the comb mode laboratory.

    python -m src.interface.cli <subcommand> [flags]

Subcommands: resonance-table, simulate, explicit, fixed-point, norms, field,
divisor-stats, batch, replay. Every run that writes an output also writes a
manifest (see manifest.py). Exit status is 0 on success, 2 for invalid input
or usage and 1 for numerical or file failures.
"""

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from dotenv import load_dotenv

from src.schemas.schemas import FixedPointReport, NormsSummary, ResonanceTableFile

from . import config
from .io import (
    mode_rows,
    parse_sequence,
    read_trajectory,
    write_csv,
    write_json,
    write_trajectory,
)
from .manifest import build_manifest, default_manifest_path, write_manifest

SYSTEMS = {"A": "A", "Atilde": "A_tilde", "A_tilde": "A_tilde", "B": "B"}


@dataclass
class RunContext:
    threads: int
    quiet: bool
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)

    def say(self, message: str):
        if not self.quiet:
            print(message)


def _env_threads() -> int:
    raw = os.getenv(config.THREADS_ENV, "1")
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"{config.THREADS_ENV} must be an integer, got '{raw}'.") from None
    return threads


def _describe(error: Exception) -> str:
    """Message prefixed with the error's machine-readable code, when it has one."""
    code = getattr(error, "code", None)
    return f"[{code}] {error}" if isinstance(code, str) else str(error)


def _parse_sweep(text: str) -> np.ndarray:
    try:
        t0, t1, n = text.split(":")
        return np.linspace(float(t0), float(t1), int(n))
    except ValueError:
        raise ValueError(f"--sweep expects t0:t1:n, got '{text}'.") from None


# --- Subcommands ---

def cmd_resonance_table(args, ctx: RunContext) -> int:
    from src.lattice.resonance import build_table

    alpha = parse_sequence(args.alpha, args.K)
    ctx.inputs.append(args.alpha)
    table = build_table(args.K, alpha, wrap=args.wrap)
    write_json(args.out, ResonanceTableFile.model_validate(table.to_json_dict()))
    ctx.outputs.append(args.out)
    ctx.say(f"✅ Resonance table K = {args.K}{' (wrap)' if args.wrap else ''}: {table.size} entries -> {args.out}")
    return config.EXIT_OK


def cmd_simulate(args, ctx: RunContext) -> int:
    from src.dynamics.diagnostics import as_B, energy_series, lab_frame, mass_drift
    from src.dynamics.integrate import integrate, integrate_from_alpha
    from src.dynamics.system import SolverConfig
    from src.lattice.resonance import build_table

    alpha = parse_sequence(args.alpha, args.K)
    ctx.inputs.append(args.alpha)
    tag = SYSTEMS[args.system]
    table = build_table(args.K, alpha, wrap=args.wrap)
    solver_config = SolverConfig(
        K=args.K, t_span=(args.t0, args.t1), rtol=args.rtol, atol=args.atol,
        samples=args.samples, tail_mode=args.tail_mode, max_step=args.max_step,
    )
    ctx.say(f"🔄 Integrating system {tag} with K = {args.K} on [{args.t0}, {args.t1}]...")
    if tag == "B":
        traj = integrate_from_alpha(alpha, table, solver_config)
    else:
        traj = integrate(tag, alpha, table, solver_config)
    write_trajectory(args.out, traj)
    ctx.outputs.append(args.out)

    if args.diagnostics:
        W = lab_frame(traj)
        energies = energy_series(W, as_B(traj).times, solver_config)
        if traj.variable_tag != "B":
            energies = energies[::-1]
        masses = np.sum(np.abs(traj.values) ** 2, axis=1)
        write_csv(args.diagnostics, config.DIAGNOSTICS_HEADER, zip(traj.times, masses, energies))
        ctx.outputs.append(args.diagnostics)

    drift = float(np.max(mass_drift(traj)))
    ctx.say(f"✅ {len(traj)} samples -> {args.out} (max mass drift {drift:.3e})")
    return config.EXIT_OK


def cmd_explicit(args, ctx: RunContext) -> int:
    from src.explicit.phase import PhaseQuadratureConfig, phase_decay_fit, phase_sweep

    if args.t is None and args.sweep is None:
        raise ValueError("explicit needs --t or --sweep.")
    times = np.array([args.t]) if args.sweep is None else _parse_sweep(args.sweep)
    cfg = PhaseQuadratureConfig(M_max=args.mmax, quad_tol=args.quad_tol)
    a = complex(args.alpha_re, args.alpha_im)
    results = phase_sweep(times, cfg)
    rows = []
    for res in results:
        B = a * np.exp(-1j * abs(a) ** 2 * res.value)
        rows.append((res.t, B.real, B.imag, res.value, res.tail_bound))
    write_csv(args.out, config.EXPLICIT_HEADER, rows)
    ctx.outputs.append(args.out)
    ctx.say(f"✅ Phase at {len(rows)} time(s), M_max = {args.mmax} -> {args.out}")
    if len(results) >= 2 and all(r.value != 0 for r in results):
        fit = phase_decay_fit(results, cfg)
        ctx.say(f"📉 Decay slope {fit.slope:.3f} (in band: {fit.within_slope_band}), t|Phi| <= {fit.constant:.3e} (envelope {fit.envelope:.3e})")
    return config.EXIT_OK


def cmd_fixed_point(args, ctx: RunContext) -> int:
    from src.fixedpoint.mapping import picard_solve, residual
    from src.fixedpoint.mesh import QuadratureConfig
    from src.lattice.resonance import build_table

    alpha = parse_sequence(args.alpha, args.K)
    ctx.inputs.append(args.alpha)
    table = build_table(args.K, alpha, wrap=args.wrap)
    quad = QuadratureConfig(T_max=args.tmax, tail_tol=args.tail_tol)
    result = picard_solve(alpha, table, args.N, args.tol, args.max_iter, quad, args.s, args.p,
                          threads=ctx.threads, progress=not ctx.quiet)
    R = result.solution
    res = residual(R, alpha, table, args.N, quad, args.s, args.p, ctx.threads)
    write_csv(args.out, config.TRAJECTORY_HEADER, mode_rows(R.times, R.values.T, np.arange(-args.K, args.K + 1)))
    report = FixedPointReport(
        K=args.K, N=args.N, s=args.s, p=args.p, T_max=args.tmax,
        converged=result.converged, iterations=result.iterations,
        ratios=result.ratios, gaps=result.gaps, residual=res,
        tail_bound=float(np.max(result.tail_bound, initial=0.0)),
    )
    report_path = args.report or args.out + ".report.json"
    write_json(report_path, report)
    ctx.outputs.extend([args.out, report_path])
    if not result.converged:
        ctx.say(f"⚠️ Picard iteration stopped after {result.iterations} steps without reaching tol = {args.tol}")
        return config.EXIT_RUNTIME
    ctx.say(f"✅ Converged in {result.iterations} steps, residual {res:.3e} -> {args.out}")
    return config.EXIT_OK


def cmd_norms(args, ctx: RunContext) -> int:
    from src.norms.windows import decay_profile, sampled_norms

    alpha = parse_sequence(args.alpha, args.K)
    ctx.inputs.append(args.alpha)
    summary_path = args.summary or args.out + ".summary.json"

    if args.profile:
        from src.fixedpoint.mapping import picard_solve
        from src.fixedpoint.mesh import QuadratureConfig
        from src.lattice.resonance import build_table

        if args.K is None or args.nu_max is None:
            raise ValueError("norms --profile needs --K and --nu-max.")
        table = build_table(args.K, alpha)
        quad = QuadratureConfig(T_max=args.tmax)
        R = None
        if args.profile != "T0":
            R = picard_solve(alpha, table, args.N, quad=quad, s=args.s, p=args.p, threads=ctx.threads,
                             progress=not ctx.quiet).solution
        nu_start = 1 if args.nu_start is None else args.nu_start
        profile = decay_profile(args.profile, alpha, R, args.s, args.p, range(nu_start, args.nu_max + 1),
                                table=table, N=args.N, quad=quad, seminorm=args.seminorm, threads=ctx.threads)
        write_csv(args.out, config.PROFILE_HEADER, ((r["nu"], r["norm"], r["scaled"]) for r in profile.rows()))
        summary = NormsSummary(s=args.s, p=args.p, nus=profile.nus.tolist(), totals=profile.scaled.tolist(),
                               xsp=float(np.max(profile.scaled)), slopes={args.profile: profile.slope})
        ctx.say(f"✅ {args.profile} profile over nu = {nu_start}..{args.nu_max}: band {profile.band:.3f}, "
                f"slope {profile.slope:.3f}")
    else:
        from src.dynamics.diagnostics import as_B

        if args.traj is None:
            raise ValueError("norms needs --traj or --profile.")
        traj = as_B(read_trajectory(args.traj, alpha, SYSTEMS[args.system]))
        ctx.inputs.append(args.traj)
        perturbation = (traj.values - alpha.dense(traj.K)[None, :]).T
        result = sampled_norms(traj.times, perturbation, args.s, args.p, args.nu_max, args.nu_start,
                               homogeneous=args.seminorm, threads=ctx.threads)
        write_csv(args.out, config.NORMS_HEADER, result.rows())
        slopes = {"total": result.slope}
        slopes.update({f"k={k}": v for k, v in result.mode_slopes().items()})
        summary = NormsSummary(s=args.s, p=args.p, nus=result.nus.tolist(), totals=result.totals.tolist(),
                               xsp=result.xsp, slopes=slopes)
        ctx.say(f"✅ X^s_p = {result.xsp:.6e} over nu = {result.nus[0]}..{result.nus[-1]}")
    write_json(summary_path, summary)
    ctx.outputs.extend([args.out, summary_path])
    return config.EXIT_OK


def cmd_field(args, ctx: RunContext) -> int:
    from src.field.synthesis import FieldGrid, as_A, synthesize_trajectory, vnls_residual

    alpha = parse_sequence(args.alpha)
    traj = read_trajectory(args.traj, alpha, SYSTEMS[args.system])
    ctx.inputs.extend([args.alpha, args.traj])
    grid = FieldGrid(args.xgrid)
    v = synthesize_trajectory(traj, grid)
    times = as_A(traj).times
    x = grid.x
    rows = ((t, xj, c.real, c.imag) for t, row in zip(times, v) for xj, c in zip(x, row))
    write_csv(args.out, config.FIELD_HEADER, rows)
    ctx.outputs.append(args.out)
    ctx.say(f"✅ Field on {len(times)} x {grid.n} points -> {args.out}")

    if args.residual:
        report = vnls_residual(traj, grid, project=not args.no_project)
        write_csv(args.residual, config.RESIDUAL_HEADER, zip(report.times, report.l2))
        ctx.outputs.append(args.residual)
        ctx.say(f"📐 Max PDE residual {report.max:.3e} -> {args.residual}")
    return config.EXIT_OK


def cmd_divisor_stats(args, ctx: RunContext) -> int:
    from src.lattice.resonance import divisor_stats

    bounds = [m for m in (2 ** j for j in range(2, 64)) if m < args.mmax] + [args.mmax]
    stats = [divisor_stats(m) for m in bounds]
    for st in stats:
        ctx.say(f"📊 M_max = {st.M_max}: max r_m = {st.max_count} at m = {st.argmax}, "
                f"mean {st.mean_count:.3f}, max / log m = {st.max_over_log:.3f}")
    if args.out:
        rows = ((st.M_max, st.max_count, st.argmax, st.mean_count, st.max_over_log) for st in stats)
        write_csv(args.out, config.DIVISOR_HEADER, rows)
        ctx.outputs.append(args.out)
    return config.EXIT_OK


def cmd_batch(args, ctx: RunContext) -> int:
    from .batch_run import batch_run

    ok = batch_run(args.experiments, only=args.only, dry_run=args.dry_run,
                   output_dir=args.output_dir, quiet=ctx.quiet)
    return config.EXIT_OK if ok else config.EXIT_RUNTIME


def cmd_replay(args, ctx: RunContext) -> int:
    from .manifest import replay

    report = replay(args.manifest_file)
    ctx.inputs.append(args.manifest_file)
    if report.reproduced:
        ctx.say(f"✅ Reproduced {len(report.manifest.output_digests)} output(s) bit for bit")
        return config.EXIT_OK
    for path in report.mismatched:
        ctx.say(f"❌ Digest mismatch: {path}")
    for path in report.missing:
        ctx.say(f"❌ Missing output: {path}")
    return config.EXIT_RUNTIME


# --- Parser ---

def _global_flags(parser: argparse.ArgumentParser, with_defaults: bool):
    """Global flags are accepted before or after the subcommand."""
    default = (lambda v: v) if with_defaults else (lambda v: argparse.SUPPRESS)
    parser.add_argument('--threads', type=int, default=default(_env_threads()),
                        help=f'Worker threads for fixed-point and norms; other subcommands run serially '
                             f'(default: ${config.THREADS_ENV} or 1)')
    parser.add_argument('--manifest', default=default(None),
                        help='Manifest path (default: <out>.manifest.json)')
    parser.add_argument('--quiet', action='store_true', default=default(False),
                        help='Suppress status output and progress bars')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=config.TOOL_NAME,
        description="Mode dynamics, fixed points and windowed norms for Dirac-comb data of the cubic NLS.",
    )
    _global_flags(parser, with_defaults=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, with_defaults=False)
    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    p = subparsers.add_parser('resonance-table', parents=[common], help='Tabulate the nonresonant interactions')
    p.add_argument('--K', type=int, required=True, help='Truncation radius')
    p.add_argument('--alpha', required=True, help='Sequence file of the data alpha')
    p.add_argument('--wrap', action='store_true', help='Cyclic truncation on Z/(2K+1)')
    p.add_argument('--out', required=True, help='Output JSON')
    p.set_defaults(handler=cmd_resonance_table)

    p = subparsers.add_parser('simulate', parents=[common], help='Integrate a truncated mode system')
    p.add_argument('--alpha', required=True)
    p.add_argument('--K', type=int, required=True)
    p.add_argument('--system', choices=sorted(SYSTEMS), default='B')
    p.add_argument('--t0', type=float, required=True)
    p.add_argument('--t1', type=float, required=True)
    p.add_argument('--rtol', type=float, default=1e-10)
    p.add_argument('--atol', type=float, default=1e-12)
    p.add_argument('--samples', type=int, default=101)
    p.add_argument('--max-step', type=float, default=float('inf'))
    p.add_argument('--tail-mode', choices=['coarse', 'refined'], default='coarse',
                   help='Large-time condition for system B')
    p.add_argument('--wrap', action='store_true')
    p.add_argument('--out', required=True, help='Trajectory CSV t,k,re,im')
    p.add_argument('--diagnostics', help='Diagnostics CSV t,mass,energy')
    p.set_defaults(handler=cmd_simulate)

    p = subparsers.add_parser('explicit', parents=[common], help='Explicit solution for constant data')
    p.add_argument('--alpha-re', type=float, required=True)
    p.add_argument('--alpha-im', type=float, default=0.0)
    p.add_argument('--t', type=float)
    p.add_argument('--sweep', help='t0:t1:n')
    p.add_argument('--mmax', type=int, default=4096, help='Frequency truncation M_max')
    p.add_argument('--quad-tol', type=float, default=1e-10, help='Certified remainder tolerance')
    p.add_argument('--out', required=True, help='CSV t,re,im,phase,tail_bound')
    p.set_defaults(handler=cmd_explicit)

    p = subparsers.add_parser('fixed-point', parents=[common], help='Picard iteration for the perturbation R')
    p.add_argument('--alpha', required=True)
    p.add_argument('--K', type=int, required=True)
    p.add_argument('--N', type=int, default=0, help='Cutoff index, R vanishes before pi N')
    p.add_argument('--s', type=float, default=0.75)
    p.add_argument('--p', type=float, default=2.0)
    p.add_argument('--tol', type=float, default=1e-10)
    p.add_argument('--max-iter', type=int, default=60)
    p.add_argument('--tmax', type=float, default=60.0)
    p.add_argument('--tail-tol', type=float, default=1e-6)
    p.add_argument('--wrap', action='store_true')
    p.add_argument('--out', required=True, help='Solution CSV t,k,re,im on the mesh')
    p.add_argument('--report', help='Report JSON (default: <out>.report.json)')
    p.set_defaults(handler=cmd_fixed_point)

    p = subparsers.add_parser('norms', parents=[common], help='Windowed H^s_p norms')
    p.add_argument('--alpha', required=True)
    p.add_argument('--traj', help='Trajectory CSV; norms of B - alpha')
    p.add_argument('--system', choices=sorted(SYSTEMS), default='B')
    p.add_argument('--profile', choices=['T0', 'T1', 'T2'], help='Decay profile of one part of the map')
    p.add_argument('--K', type=int)
    p.add_argument('--N', type=int, default=0)
    p.add_argument('--tmax', type=float, default=60.0)
    p.add_argument('--s', type=float, default=0.75)
    p.add_argument('--p', type=float, default=2.0)
    p.add_argument('--nu-start', type=int)
    p.add_argument('--nu-max', type=int)
    p.add_argument('--seminorm', action='store_true', help='Homogeneous weight |k|^s')
    p.add_argument('--out', required=True)
    p.add_argument('--summary', help='Summary JSON (default: <out>.summary.json)')
    p.set_defaults(handler=cmd_norms)

    p = subparsers.add_parser('field', parents=[common], help='Synthesize the periodic field')
    p.add_argument('--alpha', required=True)
    p.add_argument('--traj', required=True)
    p.add_argument('--system', choices=sorted(SYSTEMS), default='B')
    p.add_argument('--xgrid', type=int, default=64)
    p.add_argument('--out', required=True, help='CSV t,x,re,im')
    p.add_argument('--residual', help='Residual CSV t,res_l2')
    p.add_argument('--no-project', action='store_true', help='Residual on the grid, truncation floor included')
    p.set_defaults(handler=cmd_field)

    p = subparsers.add_parser('divisor-stats', parents=[common], help='Growth of the divisor counts r_m')
    p.add_argument('--mmax', type=int, default=4096)
    p.add_argument('--out')
    p.set_defaults(handler=cmd_divisor_stats)

    p = subparsers.add_parser('batch', parents=[common], help='Run named experiments from YAML')
    p.add_argument('--experiments', default=config.EXPERIMENTS_FILE)
    p.add_argument('--only', help='Run a single experiment by name')
    p.add_argument('--output-dir', help=f'Run directory root (default: ${config.OUTPUT_DIR_ENV} or runs)')
    p.add_argument('--dry-run', action='store_true')
    p.set_defaults(handler=cmd_batch)

    p = subparsers.add_parser('replay', parents=[common], help='Re-run a manifest and compare digests')
    p.add_argument('manifest_file')
    p.set_defaults(handler=cmd_replay)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parses argv, runs one subcommand and writes its manifest; returns the exit status."""
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return config.EXIT_USAGE
    if not argv:
        parser.print_help(sys.stderr)
        return config.EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else config.EXIT_USAGE
    if args.command is None:
        parser.print_help(sys.stderr)
        return config.EXIT_USAGE
    if args.threads < 1:
        print(f"Error: --threads must be at least 1, got {args.threads}.", file=sys.stderr)
        return config.EXIT_USAGE

    ctx = RunContext(threads=args.threads, quiet=args.quiet)
    start = time.perf_counter()
    error = None
    try:
        status = args.handler(args, ctx)
    except ValueError as e:
        error, status = _describe(e), config.EXIT_USAGE
    except (RuntimeError, OSError) as e:
        error, status = _describe(e), config.EXIT_RUNTIME
    if error is not None:
        print(f"Error: {error}", file=sys.stderr)

    out = getattr(args, "out", None)
    manifest_path = args.manifest or (default_manifest_path(out) if out else None)
    if manifest_path:
        manifest = build_manifest(args.command, argv, vars(args), ctx.inputs, ctx.outputs,
                                  time.perf_counter() - start, status, error)
        write_manifest(manifest_path, manifest)
    return status


def main():
    sys.exit(run())


if __name__ == '__main__':
    main()
