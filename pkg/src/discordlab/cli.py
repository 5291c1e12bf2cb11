"""Command-line interface: simulation, reconstruction, estimation, batch tables.

Every command is deterministic for a fixed ``--seed`` (falling back to the
``DISCORDLAB_SEED`` environment variable, then to 12345): re-running with an
identical configuration writes byte-identical files.  All artifacts embed
the seed, count budget, Monte Carlo size, and tool version; CSV files carry
them in a leading ``#`` comment line above the mandatory header row, with
numeric cells at 6 significant digits.

Exit codes: 0 success, 1 numeric/convergence failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    compare_methods,
    fd_scatter,
    mc_uncertainty,
    model_metrics,
)
from .discord import (
    discord_full,
    discord_partial,
    discord_xmodel,
    estimate_p,
    optimal_angle_distribution,
)
from .errors import BadSpec, DiscordLabError
from .measure import (
    PROJECTOR_ORDER,
    CountRecord,
    MeasurementAxis,
    PartialCountRecord,
    born_probabilities,
    exact_counts,
    poisson_counts,
    sample_counts,
    simulate_partial_counts,
)
from .qmat import density_from_dict, density_to_dict, load_density
from .states import BELL_KINDS, bell, parse_state_spec, purity_from_p
from .tomo import OptimizerConfig, conditional_states_from_partial, ml_reconstruct

DEFAULT_SEED = 12345
DEFAULT_N_TOTAL = 40_000

REFERENCE_MUS = {
    "werner": ("1", "0.83", "2/3", "0.5", "0.25"),
    "damped": ("1", "0.83", "2/3", "0.5"),
}


def _env_seed() -> int:
    raw = os.environ.get("DISCORDLAB_SEED", "")
    if raw.strip():
        try:
            return int(raw)
        except ValueError as exc:
            raise BadSpec(f"DISCORDLAB_SEED={raw!r} is not an integer") from exc
    return DEFAULT_SEED


def _meta(args, n_mc=None) -> dict:
    return {
        "tool": "discordlab",
        "version": __version__,
        "seed": int(args.seed),
        "n_total": int(getattr(args, "n_total", DEFAULT_N_TOTAL)),
        "n_mc": n_mc,
    }


def _fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _write_csv(path, header, rows, meta: dict) -> None:
    lines = [
        "# " + " ".join(f"{k}={v}" for k, v in sorted(meta.items())),
        ",".join(header),
    ]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_counts(path) -> CountRecord:
    return CountRecord.from_dict(_load_json(path))


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=int(args.seed))


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _time_mixed_components(spec):
    """Pure components whose time-weighted mixture is the target state."""
    basis = [np.zeros((4, 4), dtype=np.complex128) for _ in range(4)]
    for i in range(4):
        basis[i][i, i] = 1.0
    if spec.family == "werner":
        comps = [(spec.p, bell(spec.kind))]
        comps += [((1.0 - spec.p) / 4.0, b) for b in basis]
        return comps
    if spec.family == "damped":
        comps = [(spec.p, bell(spec.kind))]
        diag = (0, 3) if spec.kind == "phi" else (1, 2)
        comps += [((1.0 - spec.p) / 2.0, basis[i]) for i in diag]
        return comps
    if spec.label.startswith("bell"):
        return [(1.0, spec.rho)]
    raise BadSpec("--time-mixing is only meaningful for bell/werner/damped specs")


def cmd_simulate(args) -> None:
    spec = parse_state_spec(args.state_spec)
    if args.partial:
        axis = MeasurementAxis(args.axis_theta, args.axis_phi)
        rec = simulate_partial_counts(
            spec.rho, args.n_total, axis, None if args.exact else args.seed
        )
        payload = rec.to_dict()
    else:
        if args.exact:
            rec = exact_counts(born_probabilities(spec.rho), args.n_total)
        elif args.time_mixing:
            rng = np.random.default_rng(args.seed)
            total = np.zeros(16, dtype=np.int64)
            for weight, comp in _time_mixed_components(spec):
                if weight <= 0.0:
                    continue
                total += poisson_counts(
                    args.n_total * weight * born_probabilities(comp), rng
                )
            rec = CountRecord(
                labels=PROJECTOR_ORDER,
                counts=total,
                n_total=int(total[:4].sum()),
                seed=args.seed,
            )
        else:
            rec = sample_counts(born_probabilities(spec.rho), args.n_total, args.seed)
        payload = rec.to_dict()
    payload["meta"] = _meta(args)
    payload["state_spec"] = spec.label
    out = args.out or ("partial_counts.json" if args.partial else "counts.json")
    _write_json(out, payload)
    print(out)


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

def cmd_reconstruct(args) -> None:
    rec = _load_counts(args.counts)
    result = ml_reconstruct(rec, _optimizer_config(args))
    out = args.out or "rho.json"
    payload = density_to_dict(result.rho)
    payload["meta"] = _meta(args)
    _write_json(out, payload)
    diag = {
        "final_loglike": result.final_loglike,
        "iterations": result.iterations,
        "converged": result.converged,
        "n_starts": result.n_starts,
        "best_start": result.best_start,
        "meta": _meta(args),
    }
    diag_path = str(Path(out).with_suffix("")) + ".diag.json"
    _write_json(diag_path, diag)
    print(out)
    print(diag_path)


# ---------------------------------------------------------------------------
# discord
# ---------------------------------------------------------------------------

def _write_estimate(args, payload: dict) -> None:
    out = args.out or "discord.json"
    if getattr(args, "format", "json") == "csv":
        flat = dict(payload)
        axis = flat.pop("optimal_axis", None) or {}
        flat["theta"] = axis.get("theta")
        flat["phi"] = axis.get("phi")
        meta = flat.pop("meta", {})
        unc = flat.pop("uncertainty", None) or {}
        for key in ("mean", "std", "n_samples"):
            flat[f"mc_{key}"] = unc.get(key)
        header = sorted(flat)
        _write_csv(out, header, [[flat[k] for k in header]], meta)
    else:
        _write_json(out, payload)
    print(out)


def cmd_discord(args) -> None:
    data = _load_json(args.input)
    config = _optimizer_config(args)
    is_counts = "counts" in data
    if not is_counts and "re" not in data:
        raise BadSpec(
            "input JSON missing field 'counts' (count record) or 're' (density matrix)"
        )
    rec = CountRecord.from_dict(data) if is_counts else None
    rho = density_from_dict(data) if not is_counts else None

    uncertainty = None
    if args.method == "tt":
        if rho is None:
            rho = ml_reconstruct(rec, config).rho
        est = discord_full(rho)
        if args.mc:
            if rec is None:
                raise BadSpec("--mc requires count-record input")
            uncertainty = mc_uncertainty(rec, "discord-tt", args.mc, args.seed, config=config)
    elif args.method == "pt":
        if not args.cond_counts:
            raise BadSpec("--method pt requires --cond-counts")
        cond = PartialCountRecord.from_dict(_load_json(args.cond_counts))
        if rho is None:
            rho = ml_reconstruct(rec, config).rho
        est = discord_partial(rho, cond.axis, conditional_states_from_partial(cond))
        if args.mc:
            if rec is None:
                raise BadSpec("--mc requires count-record input")
            uncertainty = mc_uncertainty(
                rec, "discord-pt", args.mc, args.seed, cond_counts=cond, config=config
            )
    elif args.method == "xmodel":
        if rec is None:
            raise BadSpec("--method xmodel requires count-record input")
        if not args.family or not args.kind:
            raise BadSpec("--method xmodel requires --family and --kind")
        est = discord_xmodel(rec, args.family, args.kind, rng=args.seed)
        if args.mc:
            uncertainty = mc_uncertainty(
                rec, "discord-xmodel", args.mc, args.seed,
                family=args.family, kind=args.kind,
            )
    else:  # pragma: no cover - argparse restricts choices
        raise BadSpec(f"unknown method {args.method!r}")

    payload = est.to_dict()
    payload["meta"] = _meta(args, n_mc=args.mc)
    if uncertainty is not None:
        payload["uncertainty"] = uncertainty.to_dict()
    _write_estimate(args, payload)


# ---------------------------------------------------------------------------
# estimate-p
# ---------------------------------------------------------------------------

def cmd_estimate_p(args) -> None:
    rec = _load_counts(args.counts)
    p = estimate_p(rec, args.family, args.kind, rng=args.seed)
    payload = {
        "p": p,
        "mu": purity_from_p(p, args.family),
        "family": args.family,
        "kind": args.kind,
        "meta": _meta(args),
    }
    out = args.out or "estimate_p.json"
    if args.format == "csv":
        meta = payload.pop("meta")
        header = sorted(payload)
        _write_csv(out, header, [[payload[k] for k in header]], meta)
    else:
        _write_json(out, payload)
    print(out)


# ---------------------------------------------------------------------------
# mc-uncertainty
# ---------------------------------------------------------------------------

def cmd_mc_uncertainty(args) -> None:
    rec = _load_counts(args.counts)
    target = load_density(args.target) if args.target else None
    cond = (
        PartialCountRecord.from_dict(_load_json(args.cond_counts))
        if args.cond_counts
        else None
    )
    uv = mc_uncertainty(
        rec,
        args.quantity,
        n_samples=args.mc,
        rng_seed=args.seed,
        target=target,
        cond_counts=cond,
        family=args.family,
        kind=args.kind,
        config=_optimizer_config(args),
    )
    payload = uv.to_dict()
    payload["meta"] = _meta(args, n_mc=args.mc)
    out = args.out or "mc_uncertainty.json"
    if args.format == "csv":
        meta = payload.pop("meta")
        header = sorted(payload)
        _write_csv(out, header, [[payload[k] for k in header]], meta)
    else:
        _write_json(out, payload)
    print(out)


# ---------------------------------------------------------------------------
# fd-scatter
# ---------------------------------------------------------------------------

def _load_reference(text: str) -> tuple[np.ndarray, str]:
    if os.path.exists(text):
        return load_density(text), Path(text).stem
    spec = parse_state_spec(text)
    return spec.rho, spec.label


def cmd_fd_scatter(args) -> None:
    rec = _load_counts(args.counts)
    reference, tag = _load_reference(args.reference)
    points = fd_scatter(
        reference,
        rec,
        n_points=args.points,
        rng_seed=args.seed,
        reference_tag=tag,
        config=_optimizer_config(args),
        fidelity_root=args.fidelity_root,
    )
    out = args.out or "fd_scatter.csv"
    rows = [(p.fidelity, p.discord, p.reference_tag) for p in points]
    _write_csv(out, ("fidelity", "discord", "reference_tag"), rows, _meta(args, args.points))
    print(out)


# ---------------------------------------------------------------------------
# optimal-angle
# ---------------------------------------------------------------------------

def cmd_optimal_angle(args) -> None:
    rec = _load_counts(args.counts)
    axes = optimal_angle_distribution(
        rec, n_samples=args.samples, rng_seed=args.seed, config=_optimizer_config(args)
    )
    out = args.out or "optimal_angles.csv"
    rows = [(i, ax.theta, ax.phi, ax.degenerate) for i, ax in enumerate(axes)]
    _write_csv(out, ("sample", "theta", "phi", "degenerate"), rows, _meta(args, args.samples))
    print(out)


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------

def _reference_specs():
    for family in ("werner", "damped"):
        for kind in BELL_KINDS:
            for mu in REFERENCE_MUS[family]:
                yield f"{family}:{kind}:{mu}"


def _row_seed(base: int, index: int, n_mc: int) -> int:
    return base + index * 4 * n_mc


def cmd_reproduce(args) -> None:
    if (args.table is None) == (args.figure is None):
        raise BadSpec("reproduce needs exactly one of --table or --figure")
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_mc = args.mc or 100
    config = _optimizer_config(args)

    if args.table in (1, 2):
        rows1, rows2 = [], []
        for i, spec in enumerate(_reference_specs()):
            m = model_metrics(
                spec, args.n_total, n_mc, _row_seed(args.seed, i, n_mc), config=config
            )
            rows1.append(
                (m.family, m.kind, m.mu_th, m.fidelity_to_model.mean, m.fidelity_to_model.std)
            )
            rows2.append(
                (
                    m.family, m.kind, m.mu_th,
                    m.purity_tomo.mean, m.purity_tomo.std,
                    m.purity_xmodel.mean, m.purity_xmodel.std,
                )
            )
        if args.table == 1:
            out = out_dir / "table1.csv"
            _write_csv(
                out, ("family", "kind", "mu_th", "fidelity_mean", "fidelity_std"),
                rows1, _meta(args, n_mc),
            )
        else:
            out = out_dir / "table2.csv"
            _write_csv(
                out,
                ("family", "kind", "mu_th", "mu_t_mean", "mu_t_std", "mu_x_mean", "mu_x_std"),
                rows2, _meta(args, n_mc),
            )
        print(out)
        return

    if args.table == 3 or args.figure == 4:
        rows = []
        for i, spec in enumerate(_reference_specs()):
            c = compare_methods(
                spec, args.n_total, n_mc, _row_seed(args.seed, i, n_mc), config=config
            )
            rows.append(
                (
                    c.family, c.kind, c.mu_th,
                    c.tt.mean, c.tt.std, c.pt.mean, c.pt.std, c.x.mean, c.x.std,
                )
            )
        name = "table3.csv" if args.table == 3 else "fig4_discord.csv"
        out = out_dir / name
        _write_csv(
            out,
            (
                "family", "kind", "mu_th",
                "tt_mean", "tt_std", "pt_mean", "pt_std", "x_mean", "x_std",
            ),
            rows, _meta(args, n_mc),
        )
        print(out)
        return

    if args.figure == 3:
        n = args.mc or 900
        rows = []
        for spec_text in ("damped:psi:2/3", "bell:phi"):
            spec = parse_state_spec(spec_text)
            base = exact_counts(born_probabilities(spec.rho), args.n_total)
            axes = optimal_angle_distribution(base, n, args.seed, config=config)
            rows += [
                (spec.label, i, ax.theta, ax.phi, ax.degenerate)
                for i, ax in enumerate(axes)
            ]
        out = out_dir / "fig3_angles.csv"
        _write_csv(out, ("state", "sample", "theta", "phi", "degenerate"), rows, _meta(args, n))
        print(out)
        return

    if args.figure == 5:
        n = args.points
        rows = []
        for i, spec_text in enumerate(
            ("bell:psi", "bell:phi", "werner:psi:2/3", "werner:phi:2/3")
        ):
            spec = parse_state_spec(spec_text)
            base = exact_counts(born_probabilities(spec.rho), args.n_total)
            points = fd_scatter(
                spec.rho, base, n, _row_seed(args.seed, i, n), spec.label, config=config
            )
            rows += [(p.fidelity, p.discord, p.reference_tag) for p in points]
        out = out_dir / "fd_scatter.csv"
        _write_csv(out, ("fidelity", "discord", "reference_tag"), rows, _meta(args, n))
        print(out)
        return

    raise BadSpec(f"unsupported reproduce target: table={args.table} figure={args.figure}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discordlab",
        description=(
            "Simulated two-qubit coincidence counting, maximum-likelihood "
            "tomography, and entropic-discord estimation."
        ),
    )
    parser.add_argument("--version", action="version", version=f"discordlab {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed", type=int, default=_env_seed(),
        help="RNG seed (default: DISCORDLAB_SEED or 12345)",
    )
    common.add_argument(
        "--n-total", dest="n_total", type=int, default=DEFAULT_N_TOTAL,
        help="coincidence budget N_T per tomography run (default 40000)",
    )
    common.add_argument("--out", help="output path (command-specific default)")
    common.add_argument(
        "--format", choices=("json", "csv"), default="json",
        help="output format where applicable (default json)",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a coincidence-count record")
    p.add_argument("state_spec", help="e.g. werner:phi:0.83, damped:psi:2/3, bell:phi, x:0.5,-0.5,1")
    p.add_argument("--exact", action="store_true", help="noiseless counts round(N_T p)")
    p.add_argument(
        "--time-mixing", action="store_true",
        help="sample each pure mixture component for a time share instead of "
             "sampling the mixed state directly",
    )
    p.add_argument("--partial", action="store_true", help="partial-tomography record instead")
    p.add_argument("--axis-theta", type=float, default=0.0, help="partial measurement axis theta")
    p.add_argument("--axis-phi", type=float, default=0.0, help="partial measurement axis phi")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", parents=[common], help="maximum-likelihood reconstruction")
    p.add_argument("counts", help="count-record JSON file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("discord", parents=[common], help="estimate discord from counts or a state")
    p.add_argument("input", help="count-record or density-matrix JSON file")
    p.add_argument("--method", choices=("tt", "pt", "xmodel"), default="tt")
    p.add_argument("--family", choices=("werner", "damped"))
    p.add_argument("--kind", choices=BELL_KINDS)
    p.add_argument("--cond-counts", help="partial-count JSON for --method pt")
    p.add_argument("--mc", type=int, help="Monte Carlo samples for the uncertainty")
    p.set_defaults(func=cmd_discord)

    p = sub.add_parser("estimate-p", parents=[common], help="single-parameter mixing estimate")
    p.add_argument("counts", help="count-record JSON file")
    p.add_argument("--family", choices=("werner", "damped"), required=True)
    p.add_argument("--kind", choices=BELL_KINDS, required=True)
    p.set_defaults(func=cmd_estimate_p)

    p = sub.add_parser("mc-uncertainty", parents=[common], help="Monte Carlo uncertainty of a quantity")
    p.add_argument("counts", help="count-record JSON file")
    p.add_argument(
        "--quantity", required=True,
        choices=("purity", "fidelity-to", "discord-tt", "discord-pt", "discord-xmodel",
                 "optimal-angle"),
    )
    p.add_argument("--target", help="density-matrix JSON (for fidelity-to)")
    p.add_argument("--cond-counts", help="partial-count JSON (for discord-pt)")
    p.add_argument("--family", choices=("werner", "damped"))
    p.add_argument("--kind", choices=BELL_KINDS)
    p.add_argument("--mc", type=int, default=100, help="number of samples (default 100)")
    p.set_defaults(func=cmd_mc_uncertainty)

    p = sub.add_parser("fd-scatter", parents=[common], help="fidelity-discord scatter of neighbours")
    p.add_argument("counts", help="count-record JSON file")
    p.add_argument("--reference", required=True, help="density JSON path or state spec")
    p.add_argument("--points", type=int, default=500, help="number of neighbours (default 500)")
    p.add_argument(
        "--fidelity-root", action="store_true",
        help="report the unsquared fidelity convention",
    )
    p.set_defaults(func=cmd_fd_scatter)

    p = sub.add_parser("optimal-angle", parents=[common], help="optimal-measurement angle distribution")
    p.add_argument("counts", help="count-record JSON file")
    p.add_argument("--samples", type=int, default=900, help="resamples (default 900)")
    p.set_defaults(func=cmd_optimal_angle)

    p = sub.add_parser("reproduce", parents=[common], help="batch tables/figure data for the reference states")
    p.add_argument("--table", type=int, choices=(1, 2, 3))
    p.add_argument("--figure", type=int, choices=(3, 4, 5))
    p.add_argument("--mc", type=int, help="Monte Carlo samples per cell (default 100; 900 for figure 3)")
    p.add_argument("--points", type=int, default=500, help="points per reference for figure 5")
    p.add_argument("--out-dir", default=".", help="directory for the CSV output")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except BadSpec as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DiscordLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
