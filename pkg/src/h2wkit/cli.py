"""Command-line interface: ``h2wkit {norm,compare,sweep,bench,gen}``.

Exit codes: 0 ok, 2 parse/IO, 3 band violation, 4 degenerate spectrum,
5 backend disagreement (compare), 6 solver failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import statistics
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext

import numpy as np

from . import gramian, quadrature, spectral
from .errors import (BackendDisagreementError, BandViolationError, H2wError,
                     PreconditionError)
from .model import FrequencyBand, classify_poles, spectral_decompose
from .modelio import load_model, random_model, save_model

log = logging.getLogger('h2wkit')

EXIT_OK = 0
EXIT_PARSE = 2
COMPARE_TOL = 1e-6
WARMUP = 3
BACKENDS = ('spectral', 'gramian', 'quadrature')


def _g(x):
    return format(float(x), '.17g')


def parse_omega(text):
    t = text.strip().lower()
    if t in ('inf', '+inf', 'infinity'):
        return math.inf
    w = float(t)
    if not w >= 0:
        raise argparse.ArgumentTypeError(f"omega must be >= 0, got {text}")
    return w


def parse_band(text):
    try:
        lo, hi = text.split(':')
        return FrequencyBand(float(lo), float(hi))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad band {text!r}: {exc}")


def parse_grid(text):
    """``start:step:stop`` (inclusive) or ``log:lo:hi:num``."""
    parts = text.split(':')
    try:
        if parts[0] == 'log' and len(parts) == 4:
            lo, hi, num = float(parts[1]), float(parts[2]), int(parts[3])
            if not 0 < lo < hi or num < 2:
                raise ValueError("need 0 < lo < hi and num >= 2")
            grid = np.logspace(np.log10(lo), np.log10(hi), num)
        elif len(parts) == 3:
            start, step, stop = map(float, parts)
            if step <= 0:
                raise ValueError("step must be positive")
            k = int(math.floor((stop - start) / step + 1e-9))
            grid = start + step * np.arange(k + 1)
        else:
            raise ValueError("expected start:step:stop or log:lo:hi:num")
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}: {exc}")
    if len(grid) == 0 or grid[0] < 0:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}")
    return grid


def parse_int_list(text):
    out = []
    for part in text.split(','):
        if '-' in part:
            a, b = part.split('-')
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


# -- backend dispatch --------------------------------------------------------

def compute(model, backend, omega=None, band=None, tol=1e-9):
    """One norm evaluation; ``omega = inf`` selects the infinite-horizon norm."""
    if band is not None and band.omega_lo == 0.0:
        omega, band = band.omega_hi, None
    if backend == 'spectral':
        spec = spectral_decompose(model)
        if band is not None:
            return spectral.h2w_band(spec, band, model.D)
        if math.isinf(omega):
            return _spectral_inf(spec, model)
        return spectral.h2w_spectral(spec, model.D, omega)
    if backend == 'gramian':
        if band is not None:
            t0 = time.perf_counter()
            hi = gramian.h2w_gramian(model, band.omega_hi)
            lo = gramian.h2w_gramian(model, band.omega_lo)
            return spectral.NormResult(max(hi.value_sq - lo.value_sq, 0.0),
                                       0.0, 'gramian',
                                       time.perf_counter() - t0)
        if math.isinf(omega):
            return gramian.h2_gramian(model)
        return gramian.h2w_gramian(model, omega)
    if backend == 'quadrature':
        if band is None and math.isinf(omega):
            raise ValueError("quadrature needs a bounded band")
        return quadrature.h2w_quadrature(
            model, band if band is not None else omega, tol)
    raise ValueError(f"unknown backend {backend!r}")


def _spectral_inf(spec, model):
    cls = classify_poles(spec.eigenvalues)
    if cls.regime == 'imaginary':
        bad = tuple(complex(spec.eigenvalues[i]) for i in cls.imaginary)
        raise BandViolationError(
            "norm is infinite: model has purely imaginary poles", bad)
    if cls.regime == 'stable':
        return spectral.h2_spectral(spec, model)
    if not model.strictly_proper:
        raise PreconditionError("limit is infinite for a model with D != 0")
    t0 = time.perf_counter()
    lim = spectral.h2w_limit(spec, cls)
    return spectral.NormResult(lim.value_sq, 0.0, 'spectral',
                               time.perf_counter() - t0, physical=False)


# -- commands ----------------------------------------------------------------

def _open_out(path):
    if path in (None, '-'):
        return nullcontext(sys.stdout)
    return open(path, 'w', encoding='utf-8', newline='')


def cmd_norm(args):
    model = load_model(args.model)
    res = compute(model, args.backend, args.omega, args.band, args.tol)
    with _open_out(args.output) as out:
        out.write(f"backend {res.backend}\n")
        out.write(f"value {_g(res.value)}\n")
        out.write(f"value_sq {_g(res.value_sq)}\n")
        out.write(f"imag_residual {_g(res.imag_residual)}\n")
        out.write(f"elapsed {_g(res.elapsed)}\n")
        if not res.physical:
            out.write("note unstable model: no H2 interpretation\n")
    return EXIT_OK


def compare(model, omega, tol=1e-9):
    """All applicable backends at one frequency.

    Returns ``(results, deviation, notes)`` where ``deviation`` is the largest
    pairwise relative difference of ``value_sq``.
    """
    notes = []
    names = list(BACKENDS)
    regime = classify_poles(np.linalg.eigvals(model.A)).regime
    if not (model.strictly_proper and regime == 'stable'):
        names.remove('gramian')
        notes.append("gramian omitted: model is not stable and strictly proper")
    results = {b: compute(model, b, omega, None, tol) for b in names}
    vals = [r.value_sq for r in results.values()]
    dev = 0.0
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            scale = max(abs(a), abs(b))
            if scale > 0:
                dev = max(dev, abs(a - b) / scale)
    return results, dev, notes


def cmd_compare(args):
    model = load_model(args.model)
    if math.isinf(args.omega):
        raise ValueError("compare needs a finite omega")
    results, dev, notes = compare(model, args.omega, args.tol)
    with _open_out(args.output) as out:
        out.write(f"{'backend':<12}{'value_sq':>26}{'value':>26}\n")
        for name, r in results.items():
            out.write(f"{name:<12}{_g(r.value_sq):>26}{_g(r.value):>26}\n")
        out.write(f"max_rel_deviation {_g(dev)}\n")
        for note in notes:
            out.write(f"note {note}\n")
    if dev > COMPARE_TOL:
        raise BackendDisagreementError(
            f"backends disagree: relative deviation {dev:.3e}")
    return EXIT_OK


def sweep(model, grid, backend='spectral', tol=1e-9, jobs=1):
    """``(omega, value_sq)`` rows over an increasing grid.

    The modal decomposition is computed once for the spectral backend.
    Everything is evaluated before anything is returned.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    if backend == 'spectral':
        ev = spectral.SpectralEvaluator(spectral_decompose(model), model.D)
        ev.value(grid[-1])     # band check before any work
        fn = lambda w: ev.value(w).value_sq
    elif backend == 'gramian':
        fn = lambda w: gramian.h2w_gramian(model, w).value_sq
    elif backend == 'quadrature':
        fn = lambda w: (quadrature.h2w_quadrature(model, w, tol).value_sq
                        if w > 0 else 0.0)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            vals = list(pool.map(fn, grid))
    else:
        vals = [fn(w) for w in grid]
    return list(zip(grid.tolist(), vals))


def cmd_sweep(args):
    model = load_model(args.model)
    rows = sweep(model, args.grid, args.backend, args.tol, args.jobs)
    with _open_out(args.output) as out:
        w = csv.writer(out, lineterminator='\n')
        w.writerow(['omega', 'value_sq', 'value'])
        for omega, v in rows:
            w.writerow([_g(omega), _g(v), _g(math.sqrt(v))])
    return EXIT_OK


def _time_calls(fn, reps):
    times = []
    for i in range(reps + WARMUP):
        t0 = time.perf_counter()
        fn()
        dt = time.perf_counter() - t0
        if i >= WARMUP:
            times.append(dt)
    return times


def bench(n_list, reps=1000, omega=100.0, seed=0):
    """Mean/std wall time of both backends on one random model per order.

    Each timed call recomputes the eigendecomposition from scratch.
    Returns rows ``(n, backend, mean, std)``.
    """
    try:
        from threadpoolctl import threadpool_limits
        limiter = threadpool_limits(1)
    except ImportError:
        limiter = nullcontext()
    rows = []
    with limiter:
        for n in n_list:
            model = random_model(n, 1, 1, 'stable', seed=[seed, n])

            def run_spectral():
                spec = spectral_decompose(model)
                return spectral.h2w_spectral(spec, model.D, omega)

            def run_gramian():
                return gramian.h2w_gramian(model, omega)

            for name, fn in (('spectral', run_spectral),
                             ('gramian', run_gramian)):
                t = _time_calls(fn, reps)
                std = statistics.pstdev(t) if len(t) > 1 else 0.0
                rows.append((n, name, statistics.fmean(t), std))
                log.info("n=%d %s mean=%.3es", n, name, rows[-1][2])
    return rows


def cmd_bench(args):
    rows = bench(args.n, args.reps, args.omega, args.seed)
    with _open_out(args.output) as out:
        w = csv.writer(out, lineterminator='\n')
        w.writerow(['n', 'backend', 'mean_time', 'std_time'])
        for n, name, mean, std in rows:
            w.writerow([n, name, _g(mean), _g(std)])
    return EXIT_OK


def cmd_gen(args):
    model = random_model(args.n, args.nu, args.ny, args.spectrum, args.seed,
                         feedthrough=args.feedthrough)
    if args.output in (None, '-'):
        save_model(model, sys.stdout, args.name)
    else:
        save_model(model, args.output, args.name)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(
        prog='h2wkit',
        description="H2 and frequency-limited H2 norms of LTI models")
    p.add_argument('-v', '--verbose', action='store_true')
    sub = p.add_subparsers(dest='command', required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument('model', help="model file (h2wkit-model v1)")
        sp.add_argument('--tol', type=float, default=1e-9,
                        help="quadrature tolerance")
        sp.add_argument('--output', '-o', default='-')

    sp = sub.add_parser('norm', help="one norm value")
    common(sp)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument('--omega', type=parse_omega)
    g.add_argument('--band', type=parse_band)
    sp.add_argument('--backend', choices=BACKENDS, default='spectral')
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser('compare', help="all backends side by side")
    common(sp)
    sp.add_argument('--omega', type=parse_omega, required=True)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser('sweep', help="CSV of the norm over an omega grid")
    common(sp)
    sp.add_argument('--grid', type=parse_grid, required=True,
                    help="start:step:stop or log:lo:hi:num")
    sp.add_argument('--backend', choices=BACKENDS, default='spectral')
    sp.add_argument('--jobs', type=int, default=1)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser('bench', help="timing of spectral vs Gramian")
    common(sp, model=False)
    sp.add_argument('--n', type=parse_int_list, default=list(range(2, 201)),
                    help="orders, e.g. 10,50,100 or 2-200")
    sp.add_argument('--reps', type=int, default=1000)
    sp.add_argument('--omega', type=float, default=100.0)
    sp.add_argument('--seed', type=int, default=0)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser('gen', help="write a random model file")
    common(sp, model=False)
    sp.add_argument('--n', type=int, required=True)
    sp.add_argument('--nu', type=int, default=1)
    sp.add_argument('--ny', type=int, default=1)
    sp.add_argument('--spectrum', default='stable',
                    help="stable | antistable | mixed:p | lightly_damped:zeta")
    sp.add_argument('--seed', type=int, default=0)
    sp.add_argument('--feedthrough', action='store_true')
    sp.add_argument('--name', default=None)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s %(message)s')
    if getattr(args, 'reps', 1) < 1:
        parser.error("--reps must be >= 1")
    try:
        return args.func(args)
    except H2wError as exc:
        print(f"h2wkit: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"h2wkit: error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == '__main__':
    sys.exit(main())
