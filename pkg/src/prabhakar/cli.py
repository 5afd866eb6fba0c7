"""Command-line interface.

Exit status: 0 on success, 1 for invalid arguments or parameters outside
the admissible domain, 2 when a computation cannot meet its accuracy
contract (precision, convergence, sampling or truncation failure).
CSV floats carry 17 significant digits so they round-trip exactly; JSON
output embeds the full configuration under "config".

Random draws use numpy's Philox-4x64 counter-based generator keyed by the
64-bit --seed; --stream k selects the independent stream keyed by
seed ^ splitmix64(k).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .coherent import CoherentLabel, coherent_state, evolution_diagonal, photon_statistics
from .combinatorics import REAL_MAX, bell_polynomial, stirling_table
from .compound import JumpLaw, simulate_compound
from .counting import ParamSet, moment_m, moments, pmf_table
from .errors import ConvergenceError, DomainError, PrecisionError, SamplerError, TruncationError
from .mlf import MLQuery, PrecisionPolicy, ml3_eval
from .renewal import InterarrivalLaw, density, sample_count, sample_interarrival, survival, weibull_moments

EXIT_OK, EXIT_DOMAIN, EXIT_NUMERIC = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _g(x: float) -> str:
    return f"{x:.17g}"


def _nmax(text: str):
    if text == "auto":
        return "auto"
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a non-negative integer or 'auto'") from None
    if v < 0:
        raise argparse.ArgumentTypeError("n-max must be non-negative")
    return v


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _floats(text: str) -> list[float]:
    return [float(s) for s in text.split(",") if s.strip()]


def _add_params(p: argparse.ArgumentParser, sigma: bool = True, lam: bool = True) -> None:
    g = p.add_argument_group("fractality parameters")
    g.add_argument("--mu", type=float, default=1.0, help="0 < mu <= 1 (default 1)")
    g.add_argument("--nu", type=float, default=1.0, help="nu >= mu*gamma (default 1)")
    g.add_argument("--gamma", type=float, default=1.0, help="gamma > 0 (default 1)")
    if sigma:
        g.add_argument("--sigma", type=float, default=1.0, help="0 < sigma <= 1 (default 1)")
    if lam:
        g.add_argument("--lambda", dest="lam", type=float, default=1.0, help="rate lambda_sigma > 0, units time^-sigma (default 1)")


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
    p.add_argument("--output", "-o", default="-", help="output file, '-' for standard output")


def _params(a) -> ParamSet:
    return ParamSet(a.mu, a.nu, a.gamma, getattr(a, "sigma", 1.0), getattr(a, "lam", 1.0))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _config(a) -> dict:
    cfg = {k: v for k, v in vars(a).items() if k not in ("func", "output") and not k.startswith("_")}
    if "lam" in cfg:
        cfg["lambda"] = cfg.pop("lam")
    return cfg


def _emit(a, csv_text: str | None, result: dict) -> str:
    if a.format == "json" or csv_text is None:
        return json.dumps({"command": a.command, "version": __version__, "config": _config(a), "result": result}, indent=2, sort_keys=True) + "\n"
    return csv_text


def _complex_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


# -- subcommands --------------------------------------------------------------


def cmd_ml(a):
    policy = PrecisionPolicy(a.tol, max_precision_bits=a.max_bits)
    r = ml3_eval(MLQuery(a.mu, a.nu, a.gamma, complex(a.z.replace(" ", "")), a.deriv), policy)
    res = {
        "value": _complex_json(r.value),
        "abs_error_bound": r.abs_error_bound,
        "terms_used": r.terms_used,
        "precision_bits_used": r.precision_bits_used,
        "escalated": r.escalated,
    }
    text = _csv(
        ["re", "im", "abs_error_bound", "terms_used", "precision_bits_used", "escalated"],
        [[r.value.real, r.value.imag, r.abs_error_bound, r.terms_used, r.precision_bits_used, int(r.escalated)]],
    )
    return _emit(a, text, res)


def cmd_pmf(a):
    tab = pmf_table(_params(a), a.t, a.n_max)
    res = tab.to_dict()
    res.pop("params")
    res.pop("t")
    return _emit(a, tab.to_csv(), res)


def cmd_moments(a):
    p = _params(a)
    ms = moments(p, a.t)
    res = {
        "mean": ms.mean,
        "second_moment": ms.second_moment,
        "variance": ms.variance,
        "beta_ratio": ms.beta_ratio,
        "variance_beta_form": ms.variance_beta_form,
        "raw_moments": [moment_m(p, a.t, m) for m in range(a.order + 1)],
    }
    rows = [["mean", ms.mean], ["second_moment", ms.second_moment], ["variance", ms.variance], ["beta_ratio", ms.beta_ratio], ["variance_beta_form", ms.variance_beta_form]]
    rows += [[f"raw_moment_{m}", v] for m, v in enumerate(res["raw_moments"])]
    return _emit(a, _csv(["quantity", "value"], rows), res)


def cmd_interarrival(a):
    law = InterarrivalLaw(_params(a))
    taus = _floats(a.tau)
    rows = []
    for tau in taus:
        rows.append([tau, survival(law, tau), density(law, tau) if tau > 0 else math.inf])
    res = {"rows": [{"tau": r[0], "survival": r[1], "density": None if math.isinf(r[2]) else r[2]} for r in rows]}
    if law.is_weibull:
        w = weibull_moments(a.sigma, a.lam)
        res["weibull"] = {"mean": w.mean, "second_moment": w.second_moment, "variance": w.variance, "variance_beta": w.variance_beta}
    return _emit(a, _csv(["tau", "survival", "density"], rows), res)


def cmd_sample(a):
    p = _params(a)
    if a.what == "count":
        if a.t is None:
            raise _UsageError("--t is required with --what count")
        vals = sample_count(p, a.t, a.count, a.seed, stream=a.stream)
        header = {"params": p.as_dict(), "seed": a.seed, "stream": a.stream, "method": "inverse_cdf_table", "t": a.t, "count": a.count}
        text = "# " + json.dumps(header, sort_keys=True) + "\n" + "".join(f"{int(v)}\n" for v in vals)
        res = {"method": "inverse_cdf_table", "values": [int(v) for v in vals], "n_extrapolated": 0}
        return _emit(a, text, res)
    batch = sample_interarrival(InterarrivalLaw(p), a.count, a.seed, stream=a.stream)
    res = {"method": batch.method, "values": [float(v) for v in batch.values], "n_extrapolated": batch.n_extrapolated}
    return _emit(a, batch.to_csv(), res)


def _jump(text: str) -> JumpLaw:
    kind, _, rest = text.partition(":")
    kind = kind.strip().lower()
    if kind == "empirical-csv":
        path, _, col = rest.rpartition(":") if rest.count(":") else (rest, "", "")
        if not path:
            path, col = col, ""
        column = int(col) if col.isdigit() else (col or 0)
        return JumpLaw.from_csv(path, column)
    try:
        vals = tuple(float(v) for v in rest.split(",") if v.strip())
    except ValueError:
        raise DomainError(f"cannot parse jump parameters in {text!r}") from None
    if kind == "empirical":
        return JumpLaw.empirical(vals)
    return JumpLaw(kind, vals)


def cmd_compound(a):
    jump = _jump(a.jump)
    r = simulate_compound(_params(a), a.t, jump, a.paths, a.seed)
    res = r.summary()
    res["jump"] = jump.as_dict() if jump.kind != "empirical" else {"kind": "empirical", "size": len(jump.params)}
    if a.samples:
        return _emit(a, r.to_csv(), dict(res, samples=[float(v) for v in r.samples]))
    rows = [[k, v if not isinstance(v, bool) else int(v)] for k, v in r.summary().items()]
    return _emit(a, _csv(["quantity", "value"], rows), res)


def cmd_bell(a):
    rows = [[m, bell_polynomial(a.mu, a.nu, a.gamma, a.x, m).value] for m in range(a.max_m + 1)]
    res = {"x": a.x, "values": [r[1] for r in rows]}
    return _emit(a, _csv(["m", "value"], rows), res)


def cmd_stirling(a):
    tab = stirling_table(a.mu, a.nu, a.gamma, a.max_m)
    rows = [[m, l, str(c), pf, v] for m, l, c, pf, v in tab.rows()]
    res = {"entries": [{"m": m, "l": l, "classic": str(c), "prefactor": pf, "value": v} for m, l, c, pf, v in tab.rows()]}
    return _emit(a, _csv(["m", "l", "classic", "prefactor", "value"], rows), res)


def cmd_coherent(a):
    label = CoherentLabel(complex(a.re, a.im), a.mu, a.nu, a.gamma, a.sigma)
    st = photon_statistics(label)
    state = coherent_state(label, a.n_max)
    res = {
        "mean": st.mean,
        "second_moment": st.second_moment,
        "mandel_q": st.mandel_q,
        "n_max": state.n_max,
        "truncation_loss": state.truncation_loss,
        "amplitudes": [{"n": n, "re": z.real, "im": z.imag, "prob": abs(z) ** 2} for n, z in enumerate(state.amplitudes)],
    }
    if a.omega_t is not None:
        res["evolution_diagonal"] = _complex_json(evolution_diagonal(label, a.omega_t))
    return _emit(a, state.to_csv(), res)


def cmd_verify(a):
    from .verify import CRITERIA

    results = []
    for crit in CRITERIA:
        r = crit(quick=a.quick)
        results.append(r)
        if a.format == "csv":
            print(r.line(), file=sys.stderr, flush=True)
    res = {
        "all_passed": all(r.passed for r in results),
        "checks": [
            {"name": r.name, "passed": r.passed, "metric": r.metric, "threshold": r.threshold, "seconds": r.seconds, "detail": r.detail}
            for r in results
        ],
    }
    rows = [[r.name, "PASS" if r.passed else "FAIL", r.metric, r.threshold, round(r.seconds, 2)] for r in results]
    a._verify_failed = not res["all_passed"]
    return _emit(a, _csv(["check", "status", "worst", "limit", "seconds"], rows), res)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prabhakar", description=__doc__.split("\n\n")[0], epilog="Exit status: 0 ok, 1 invalid input, 2 numerical failure.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ml", help="evaluate the three-parameter Mittag-Leffler function or a z-derivative")
    _add_params(p, sigma=False, lam=False)
    p.add_argument("--z", required=True, help="argument, real or complex such as '1.5-2j'")
    p.add_argument("--deriv", type=int, default=0, help="derivative order (default 0)")
    p.add_argument("--tol", type=float, default=1e-12, help="target relative tolerance")
    p.add_argument("--max-bits", type=int, default=1024, help="precision ceiling in bits")
    _add_output(p)
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("pmf", help="probability table P(n, t)")
    _add_params(p)
    p.add_argument("--t", type=float, required=True, help="time t >= 0")
    p.add_argument("--n-max", type=_nmax, default="auto", help="largest n or 'auto' (default)")
    _add_output(p)
    p.set_defaults(func=cmd_pmf)

    p = sub.add_parser("moments", help="mean, second moment, variance and raw moments")
    _add_params(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--order", type=int, default=4, help=f"highest raw moment, at most {REAL_MAX}")
    _add_output(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("interarrival", help="waiting-time survival and density")
    _add_params(p)
    p.add_argument("--tau", required=True, help="comma-separated waiting times")
    _add_output(p)
    p.set_defaults(func=cmd_interarrival)

    p = sub.add_parser("sample", help="draw waiting times or counts")
    _add_params(p)
    p.add_argument("--what", choices=("interarrival", "count"), default="interarrival")
    p.add_argument("--t", type=float, default=None, help="time for count sampling")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=_seed, default=0, help="64-bit seed (default 0)")
    p.add_argument("--stream", type=int, default=0, help="stream index for parallel batches")
    _add_output(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("compound", help="Monte Carlo of the compound process")
    _add_params(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument(
        "--jump",
        required=True,
        help="jump law: constant:C | uniform:A,B | gaussian:MEAN,SD | exponential:RATE | empirical:V1,V2,... | empirical-csv:PATH[:COLUMN]",
    )
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--samples", action="store_true", help="emit every path value instead of the summary")
    _add_output(p)
    p.set_defaults(func=cmd_compound)

    p = sub.add_parser("bell", help="fractional Bell polynomials B(x, m), m = 0..max-m")
    _add_params(p, sigma=False, lam=False)
    p.add_argument("--x", type=float, default=1.0)
    p.add_argument("--max-m", type=int, default=10)
    _add_output(p)
    p.set_defaults(func=cmd_bell)

    p = sub.add_parser("stirling", help="fractional Stirling numbers of the second kind")
    _add_params(p, sigma=False, lam=False)
    p.add_argument("--max-m", type=int, default=10)
    _add_output(p)
    p.set_defaults(func=cmd_stirling)

    p = sub.add_parser("coherent", help="coherent-state amplitudes and photon statistics")
    _add_params(p, lam=False)
    p.add_argument("--re", type=float, default=1.0, help="real part of the label")
    p.add_argument("--im", type=float, default=0.0, help="imaginary part of the label")
    p.add_argument("--n-max", type=_nmax, default="auto")
    p.add_argument("--omega-t", type=float, default=None, help="also report the evolution-operator diagonal element")
    _add_output(p)
    p.set_defaults(func=cmd_coherent)

    p = sub.add_parser("verify", help="run the self-verification suite")
    p.add_argument("--quick", action="store_true", help="smaller grids and sample sizes (smoke run)")
    _add_output(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        text = a.func(a)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (PrecisionError, ConvergenceError, SamplerError, TruncationError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if a.output == "-":
        sys.stdout.write(text)
    else:
        with open(a.output, "w", newline="") as fh:
            fh.write(text)
    if getattr(a, "_verify_failed", False):
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
