"""Batch experiment harness.

Subcommands: coeffs, norm-scan, sample, estimate-rdm, estimate-fidelity,
estimate-xtype, learn, verify.  Everything with a seed is bit-reproducible;
CSV/JSON outputs embed a schema string.

Exit codes: 0 ok, 2 usage, 3 data error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import IO, Sequence

import numpy as np

from . import coefficients as coeffs_mod
from .channel import (
    DataFormatError,
    EstimatorConfig,
    aggregate,
    collect_shadows,
    estimate_fidelity,
    estimate_xtype,
    read_shadows,
    standard_error,
    write_shadows,
)
from .gaussian import SlaterDescriptor, covariance_of_slater
from .learner import end_to_end_learn, estimate_R, learn_slater

SCHEMA_PREFIX = "matchgate-shadows/v1"

_EXIT_OK = 0
_EXIT_USAGE = 2
_EXIT_DATA = 3
_EXIT_VERIFY = 4


class _UsageError(Exception):
    pass


def _parse_m_range(text: str) -> list[int]:
    """Accept '4' or '1..4'."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo_i, hi_i = int(lo), int(hi)
        else:
            lo_i = hi_i = int(text)
    except ValueError as exc:
        raise _UsageError(f"bad m range {text!r}") from exc
    if lo_i < 1 or hi_i < lo_i:
        raise _UsageError(f"empty or invalid m range {text!r}")
    return list(range(lo_i, hi_i + 1))


def _open_out(path: str | None) -> IO[str]:
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w")


def _load_state(path: str) -> SlaterDescriptor:
    try:
        with open(path) as fh:
            return SlaterDescriptor.from_json(fh.read())
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot parse state file {path}: {exc}") from exc


def _load_shadows(path: str):
    try:
        with open(path) as fh:
            return list(read_shadows(fh))
    except OSError as exc:
        raise DataFormatError(f"cannot read shadows file {path}: {exc}") from exc


def _write_report(out: IO[str], payload: dict) -> None:
    payload = {"schema": f"{SCHEMA_PREFIX}/report", **payload}
    out.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------


def cmd_coeffs(args: argparse.Namespace, out: IO[str]) -> int:
    ms = _parse_m_range(args.m)
    if max(ms) > 200:
        raise _UsageError("coeffs tables are limited to m <= 200")
    table = args.table
    out.write(f"# schema: {SCHEMA_PREFIX}/coeffs/{table}\n")
    if table == "lambda":
        out.write("m,k,lambda,lambda_float\n")
        for m in ms:
            for k in range(m + 1):
                lam = coeffs_mod.channel_eigenvalue(m, k)
                out.write(f"{m},{k},{lam.numerator}/{lam.denominator},{float(lam):.17g}\n")
    elif table == "projector":
        out.write("m,projector_bound,limit_2m\n")
        for m in ms:
            out.write(f"{m},{coeffs_mod.projector_norm_bound(m):.17g},{2*m}\n")
    else:  # xtype
        out.write("m,n,f,f_full\n")
        for m in ms:
            for n in range(0, m + 1, 2):
                half = coeffs_mod.xtype_norm_bound_halved(m, n)
                out.write(f"{m},{n},{half:.17g},{2*half:.17g}\n")
    return _EXIT_OK


def cmd_norm_scan(args: argparse.Namespace, out: IO[str]) -> int:
    if args.m_max > 100:
        raise _UsageError("norm scan is limited to m <= 100")
    rows = coeffs_mod.xtype_norm_scan(args.m_max)
    out.write(f"# schema: {SCHEMA_PREFIX}/norm-scan\n")
    out.write("m,n,f,F0,F1,monotone_ok\n")
    for r in rows:
        out.write(
            f"{r['m']},{r['n']},{r['f']:.17g},{r['F0']:.17g},{r['F1']:.17g},"
            f"{str(bool(r['monotone_ok'])).lower()}\n"
        )
    return _EXIT_OK


def cmd_sample(args: argparse.Namespace, out: IO[str]) -> int:
    state = _load_state(args.state)
    cov = covariance_of_slater(state)
    shadows = collect_shadows(
        cov, args.samples, ensemble=args.ensemble, seed=args.seed, threads=args.threads
    )
    write_shadows(out, shadows)
    return _EXIT_OK


def _estimator_config(args: argparse.Namespace) -> EstimatorConfig:
    aggregation = "median_of_means" if args.aggregation == "medians" else "mean"
    return EstimatorConfig(aggregation=aggregation, batches=args.batches)


def cmd_estimate_fidelity(args: argparse.Namespace, out: IO[str]) -> int:
    target = _load_state(args.state)
    shadows = _load_shadows(args.shadows)
    if not shadows:
        raise DataFormatError("zero samples: nothing to estimate")
    values = [estimate_fidelity(s, target) for s in shadows]
    cfg = _estimator_config(args)
    _write_report(
        out,
        {
            "value": aggregate(values, cfg),
            "std_error": standard_error(values),
            "n_samples": len(values),
            "aggregation": cfg.aggregation,
        },
    )
    return _EXIT_OK


def cmd_estimate_xtype(args: argparse.Namespace, out: IO[str]) -> int:
    target = _load_state(args.state)
    shadows = _load_shadows(args.shadows)
    if not shadows:
        raise DataFormatError("zero samples: nothing to estimate")
    values = [estimate_xtype(s, target) for s in shadows]
    cfg = _estimator_config(args)
    re_part = aggregate([v.real for v in values], cfg)
    im_part = aggregate([v.imag for v in values], cfg)
    se = float(np.hypot(standard_error([v.real for v in values]),
                        standard_error([v.imag for v in values])))
    _write_report(
        out,
        {
            "value": {"re": re_part, "im": im_part},
            "std_error": se,
            "n_samples": len(values),
            "aggregation": cfg.aggregation,
        },
    )
    return _EXIT_OK


def cmd_estimate_rdm(args: argparse.Namespace, out: IO[str]) -> int:
    shadows = _load_shadows(args.shadows)
    if not shadows:
        raise DataFormatError("zero samples: nothing to estimate")
    est = estimate_R(shadows)
    _write_report(
        out,
        {
            "m": est.m,
            "n_samples": est.n_samples,
            "R": [[[float(z.real), float(z.imag)] for z in row] for row in est.matrix],
            "std_errors": [[float(x) for x in row] for row in est.std_errors],
        },
    )
    return _EXIT_OK


def cmd_learn(args: argparse.Namespace, out: IO[str]) -> int:
    truth = _load_state(args.state)
    if args.shadows is not None:
        shadows = _load_shadows(args.shadows)
        if not shadows:
            raise DataFormatError("zero samples: nothing to learn from")
        est = estimate_R(shadows)
        report = learn_slater(est, truth.n)
    else:
        report = end_to_end_learn(
            truth,
            eps_fid=args.epsilon,
            delta=args.delta,
            seed=args.seed,
            n_samples=args.samples,
            ensemble=args.ensemble,
            threads=args.threads,
        )
    payload = report.to_json_dict()
    if args.shadows is not None:
        from .gaussian import fidelity_slaters

        payload["fidelity_vs_truth"] = fidelity_slaters(report.learned, truth)
    _write_report(out, payload)
    return _EXIT_OK


# ---------------------------------------------------------------------------
# Verification suite.
# ---------------------------------------------------------------------------


def _verify_channel_eigenvalue(m: int, fault: str | None) -> None:
    from . import dense as dn
    from . import majorana as mj

    apply_ch = dn.channel_dense(m, dn.full_permutation_group(m))
    for seq in mj.all_sequences(m):
        lam = float(coeffs_mod.channel_eigenvalue_of_degree(m, len(seq)))
        if fault == "channel-eigenvalue" and len(seq) == 2:
            lam = float(coeffs_mod.channel_eigenvalue(m, 1) + Fraction(1, 7))
        g = dn.gamma_dense(m, seq)
        if np.max(np.abs(apply_ch(g) - lam * g)) > 1e-12:
            raise AssertionError(f"m={m}, mu={seq}")


def _verify_matching_ensemble(m: int, fault: str | None) -> None:
    from . import dense as dn
    from . import ensembles as en
    from . import majorana as mj

    reps = [en.representative_permutation(mt) for mt in en.enumerate_matchings(m)]
    ch_full = dn.channel_dense(m, dn.full_permutation_group(m))
    ch_match = dn.channel_dense(m, reps)
    for seq in mj.all_sequences(m):
        g = dn.gamma_dense(m, seq)
        if np.max(np.abs(ch_full(g) - ch_match(g))) > 1e-12:
            raise AssertionError(f"m={m}, mu={seq}")


def _verify_second_moment(m: int, fault: str | None) -> None:
    from . import dense as dn
    from .channel import predicted_second_moment

    rng = np.random.default_rng(2024)
    for _ in range(5):
        hmap = dn.random_even_coefficient_map(m, rng)
        rmap, rho = dn.random_density_coefficient_map(m, rng)
        pred = predicted_second_moment(hmap, rmap)
        ref = dn.second_moment_dense(m, dn.dense_from_coefficient_map(hmap), rho)
        if abs(pred - ref) > 1e-9 * max(1.0, abs(ref)):
            raise AssertionError(f"m={m}: predicted {pred} vs dense {ref}")


def _verify_inverse_diag(m: int, fault: str | None) -> None:
    from . import dense as dn

    f = coeffs_mod.inverse_diag_decomposition(m).f
    dim = 2**m
    proj = np.zeros((dim, dim), dtype=complex)
    proj[0, 0] = 1.0
    inv = dn.inverse_channel_dense(m, proj)
    diag = np.real(np.diag(inv))
    if np.max(np.abs(inv - np.diag(diag))) > 1e-10:
        raise AssertionError(f"m={m}: inverse image not diagonal")
    for b in range(dim):
        weight = bin(b).count("1")
        if abs(diag[b] - f[weight]) > 1e-10:
            raise AssertionError(f"m={m}, b={b:b}")


def cmd_verify(args: argparse.Namespace, out: IO[str]) -> int:
    level = os.environ.get("MS_VERIFY_LEVEL", args.level)
    fault = args.inject_fault
    checks = [
        ("channel-eigenvalue", lambda: [_verify_channel_eigenvalue(m, fault) for m in (1, 2)]),
        ("matching-ensemble", lambda: [_verify_matching_ensemble(m, fault) for m in (1, 2)]),
        ("second-moment", lambda: _verify_second_moment(2, fault)),
        ("inverse-diag", lambda: [_verify_inverse_diag(m, fault) for m in (1, 2)]),
    ]
    if level == "full":
        checks += [
            ("channel-eigenvalue-m3", lambda: _verify_channel_eigenvalue(3, fault)),
            ("matching-ensemble-m3", lambda: _verify_matching_ensemble(3, fault)),
            ("second-moment-m3", lambda: _verify_second_moment(3, fault)),
            ("inverse-diag-m4", lambda: [_verify_inverse_diag(m, fault) for m in (3, 4)]),
        ]
    failures = []
    for name, fn in checks:
        try:
            fn()
            out.write(f"[PASS] {name}\n")
        except AssertionError as exc:
            failures.append(name)
            out.write(f"[FAIL] {name}  {exc}\n")
    if failures:
        out.write(f"verification failed: {', '.join(failures)}\n")
        return _EXIT_VERIFY
    out.write("all checks passed\n")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mgshadows",
        description="Fermionic classical shadows in the Majorana-permutation ensemble.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="emit exact coefficient tables as CSV")
    p.add_argument("--m", required=True, help="mode count or range, e.g. 4 or 1..4")
    p.add_argument("--table", choices=("lambda", "projector", "xtype"), default="lambda")
    p.add_argument("--out", default=None)

    p = sub.add_parser("norm-scan", help="scan the X-type norm bound f(m, n)")
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("sample", help="collect shadows of a Slater state as JSONL")
    p.add_argument("--state", required=True, help="SlaterDescriptor JSON file")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--ensemble", choices=("full", "matchings"), default="full")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)

    for name in ("estimate-fidelity", "estimate-xtype"):
        p = sub.add_parser(name, help=f"{name} from a shadow file")
        p.add_argument("--state", required=True)
        p.add_argument("--shadows", required=True)
        p.add_argument("--aggregation", choices=("mean", "medians"), default="mean")
        p.add_argument("--batches", type=int, default=1)
        p.add_argument("--out", default=None)

    p = sub.add_parser("estimate-rdm", help="one-body matrix estimate from shadows")
    p.add_argument("--shadows", required=True)
    p.add_argument("--out", default=None)

    p = sub.add_parser("learn", help="learn a Slater determinant")
    p.add_argument("--state", required=True, help="hidden truth (and electron count)")
    p.add_argument("--shadows", default=None, help="use pre-collected shadows")
    p.add_argument("--samples", type=int, default=None, help="override the sample count")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", choices=("full", "matchings"), default="full")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="run the dense-oracle cross-check suite")
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--inject-fault", default=None, help=argparse.SUPPRESS)
    p.add_argument("--out", default=None)

    return parser


_HANDLERS = {
    "coeffs": cmd_coeffs,
    "norm-scan": cmd_norm_scan,
    "sample": cmd_sample,
    "estimate-fidelity": cmd_estimate_fidelity,
    "estimate-xtype": cmd_estimate_xtype,
    "estimate-rdm": cmd_estimate_rdm,
    "learn": cmd_learn,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = _open_out(getattr(args, "out", None))
    try:
        return _HANDLERS[args.command](args, out)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return _EXIT_USAGE
    except DataFormatError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return _EXIT_DATA
    finally:
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
