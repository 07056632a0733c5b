"""Command-line front-end.

Subcommands: ``fit``, ``select``, ``simulate``, ``km``, ``demo``.  Every
command honors --seed for full determinism, prints a human-readable table,
and writes a versioned JSON report (plus CSVs and PNG figures where the
command produces curves) into --out.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .cure import CureModel, Incidence, IncidenceModel, Link, apply_link
from .inference import (
    FitResult,
    ModelSpec,
    cure_fraction_by_profile,
    fit,
    default_selection_grid,
    select,
)
from .kaplan_meier import _km_arrays, kaplan_meier
from .kernels import DensityGenerator, LATENCY_FAMILY_ALIASES, LogSymmetricDist
from .likelihood import ParamVector, SurvivalDataset
from .optim import OptimConfig
from .plots import plot_km, plot_km_overlay
from .report import (
    InputError,
    RunReport,
    read_survival_csv,
    write_survival_csv,
    write_table_csv,
)
from .simulate import BETA_CF10, BETA_CF30, SimConfig, run_study

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3

# Final-model estimates and demo design for the synthetic leprosy-like cohort.
DEMO_BETA = np.array([-1.551, -3.264, 3.063])
DEMO_ETA = 8.787
DEMO_PHI = 1.862
DEMO_NU = 8.0
DEMO_N = 263
DEMO_GROUPS = (  # (label, x1, x2, frequency)
    ("Multibacillary-Dimorfa", 0.0, 0.0, 0.45),
    ("Multibacillary-Virchowiana", 1.0, 0.0, 0.25),
    ("Paucibacillary-Tuberculoid", 0.0, 1.0, 0.30),
)
DEMO_TARGET_CENSORING = 0.44


class FitFailure(RuntimeError):
    pass


def _fmt(v, width=10, prec=4):
    if v is None or (isinstance(v, float) and not np.isfinite(v)):
        return "-".rjust(width)
    return f"{v:.{prec}f}".rjust(width)


def _print_table(header: list[str], rows, widths=None):
    widths = widths or [max(12, len(h) + 2) for h in header]
    print("".join(h.rjust(w) for h, w in zip(header, widths)))
    for row in rows:
        print("".join(str(c).rjust(w) for c, w in zip(row, widths)))


def _subset_covariates(data: SurvivalDataset, arg: str | None) -> SurvivalDataset:
    if arg is None:
        return data
    if arg.strip().lower() == "none":
        return SurvivalDataset(y=data.y, delta=data.delta, X=data.X[:, :1])
    wanted = [c.strip() for c in arg.split(",") if c.strip()]
    missing = [c for c in wanted if c not in data.covariate_names]
    if missing:
        raise InputError(f"unknown covariate column(s): {', '.join(missing)}")
    idx = [0] + [1 + data.covariate_names.index(c) for c in wanted]
    return SurvivalDataset(
        y=data.y, delta=data.delta, X=data.X[:, idx], covariate_names=tuple(wanted)
    )


def _spec_from_args(args) -> ModelSpec:
    link = Link(args.link) if getattr(args, "link", None) else None
    extra = getattr(args, "extra", None)
    return ModelSpec(Incidence(args.incidence), args.latency, extra, link)


def _fit_result_table(result: FitResult):
    rows = []
    for name, est, se in zip(
        result.parameter_names(), result.lambda_hat.as_array(), result.se
    ):
        rows.append([name, _fmt(est), _fmt(se)])
    return rows


def _indicator_profiles(data: SurvivalDataset):
    """Distinct observed covariate rows, when all covariates are 0/1 indicators."""
    if data.X.shape[1] == 1:
        return [np.ones(1)]
    cov = data.X[:, 1:]
    if not np.all(np.isin(cov, (0.0, 1.0))):
        return []
    profiles = np.unique(data.X, axis=0)
    if profiles.shape[0] > 10:
        return []
    return [p for p in profiles]


def _ensure_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _portable_path(path, out: Path) -> str | None:
    """Report paths inside --out relative to it, so that reruns into a
    different directory still produce byte-identical reports."""
    if path is None:
        return None
    p = Path(path)
    try:
        return str(p.resolve().relative_to(out.resolve()))
    except ValueError:
        return str(p)


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    out = _ensure_out(args)
    data = _subset_covariates(read_survival_csv(args.data), args.covariates)
    spec = _spec_from_args(args)
    config = OptimConfig(n_starts=args.starts, seed=args.seed)
    try:
        result = fit(data, spec, config)
    except RuntimeError as exc:
        raise FitFailure(str(exc)) from exc

    print(f"model: {spec.label()}  link={spec.incidence_model().link.value}")
    _print_table(["parameter", "estimate", "se"], _fit_result_table(result))
    print(
        f"loglik={result.loglik:.4f}  AIC={result.aic:.3f}  BIC={result.bic:.3f}"
        f"  converged={result.converged}"
    )

    profiles = _indicator_profiles(data)
    profile_rows = []
    for p in profiles:
        cf = cure_fraction_by_profile(result, p)
        label = ",".join(
            f"{name}={int(v)}" for name, v in zip(data.covariate_names, p[1:])
        ) or "intercept-only"
        profile_rows.append({"profile": label, "cure_fraction": cf})
    if profile_rows:
        print("cure fractions by covariate profile:")
        _print_table(
            ["profile", "cure_fraction"],
            [[r["profile"], _fmt(r["cure_fraction"])] for r in profile_rows],
            widths=[36, 16],
        )

    report = RunReport(
        command="fit",
        args={
            "data": _portable_path(args.data, out),
            "incidence": args.incidence,
            "latency": args.latency,
            "extra": args.extra,
            "link": spec.incidence_model().link.value,
            "covariates": args.covariates,
            "starts": args.starts,
        },
        seed=args.seed,
        results={"fit": result.to_dict(), "cure_fraction_profiles": profile_rows},
    )
    report.write(out / "fit_report.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# select


def _load_grid(arg: str) -> list[ModelSpec]:
    if arg == "paper-table8":
        return default_selection_grid()
    path = Path(arg)
    if not path.exists():
        raise InputError(f"unknown grid {arg!r} (not a builtin, not a file)")
    grid = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) not in (2, 3):
            raise InputError(f"bad grid line: {line!r}")
        extra = float(parts[2]) if len(parts) == 3 and parts[2] not in ("", "-") else None
        try:
            grid.append(ModelSpec(Incidence(parts[0]), parts[1], extra))
        except ValueError as exc:
            raise InputError(f"bad grid line {line!r}: {exc}") from exc
    if not grid:
        raise InputError("grid file holds no candidates")
    return grid


def cmd_select(args) -> int:
    out = _ensure_out(args)
    data = _subset_covariates(read_survival_csv(args.data), args.covariates)
    grid = _load_grid(args.grid)
    config = OptimConfig(n_starts=args.starts, seed=args.seed)
    rows = select(data, grid, config, criterion=args.criterion)

    finite_rows = [r for r in rows if np.isfinite(r.aic)]
    best_aic = min((r.aic for r in finite_rows), default=np.inf)
    best_bic = min((r.bic for r in finite_rows), default=np.inf)
    table = []
    for r in rows:
        mark_a = "*" if r.aic == best_aic else " "
        mark_b = "*" if r.bic == best_bic else " "
        table.append(
            [
                r.spec.incidence.value,
                r.spec.latency,
                "-" if r.spec.extra is None else f"{r.spec.extra:g}",
                _fmt(r.aic, prec=3) + mark_a,
                _fmt(r.bic, prec=3) + mark_b,
                "yes" if r.converged else "no",
            ]
        )
    _print_table(["incidence", "latency", "extra", "AIC", "BIC", "converged"], table)

    report = RunReport(
        command="select",
        args={
            "data": _portable_path(args.data, out),
            "grid": args.grid,
            "criterion": args.criterion,
            "covariates": args.covariates,
            "starts": args.starts,
        },
        seed=args.seed,
        results={"candidates": [r.to_dict() for r in rows]},
    )
    report.write(out / "select_report.json")
    write_table_csv(
        out / "select_table.csv",
        ["incidence", "latency", "extra", "aic", "bic", "loglik", "converged"],
        [
            [
                r.spec.incidence.value,
                r.spec.latency,
                "" if r.spec.extra is None else repr(r.spec.extra),
                repr(r.aic),
                repr(r.bic),
                repr(r.loglik),
                int(r.converged),
            ]
            for r in rows
        ],
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(args) -> int:
    out = _ensure_out(args)
    if args.beta is not None:
        beta = np.array([float(v) for v in args.beta.split(",")])
    elif args.cf == 10:
        beta = BETA_CF10.copy()
    elif args.cf == 30:
        beta = BETA_CF30.copy()
    else:
        raise InputError("--cf outside {10, 30} requires an explicit --beta")
    spec = ModelSpec(
        Incidence(args.incidence),
        args.latency,
        args.extra,
        Link(args.link) if args.link else None,
    )
    config = SimConfig(
        n=args.n,
        spec=spec,
        beta=beta,
        eta=args.eta,
        phi=args.phi,
        target_cp=args.cp / 100.0,
        replicates=args.replicates,
        seed=args.seed,
    )
    fit_config = OptimConfig(n_starts=args.starts, seed=args.seed)
    try:
        summary, archive = run_study(config, fit_config)
    except RuntimeError as exc:
        raise FitFailure(str(exc)) from exc

    rows = []
    for j, name in enumerate(summary.parameter_names):
        rows.append(
            [
                name,
                _fmt(summary.mean[j], prec=3),
                _fmt(summary.relative_bias[j], prec=3),
                _fmt(summary.root_relative_mse[j], prec=3),
                _fmt(summary.se[j], prec=3),
            ]
        )
    _print_table(["parameter", "mean", "RB", "rootRMSE", "se"], rows)
    print(
        f"replicates used={summary.replicates_used}"
        f"  failures={summary.convergence_failures}"
        f"  realized cf={summary.realized_cf:.3f}"
        f"  realized cp_total={summary.realized_cp_total:.3f}"
    )

    write_table_csv(
        out / "replicates.csv",
        archive["parameter_names"],
        [[repr(float(v)) for v in row] for row in archive["estimates"]],
    )
    report = RunReport(
        command="simulate",
        args={
            "n": args.n,
            "cp": args.cp,
            "cf": args.cf,
            "replicates": args.replicates,
            "incidence": args.incidence,
            "latency": args.latency,
            "extra": args.extra,
            "eta": args.eta,
            "phi": args.phi,
            "beta": [float(b) for b in beta],
            "starts": args.starts,
        },
        seed=args.seed,
        results={"summary": summary.to_dict()},
    )
    report.write(out / "simulate_report.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# km


def _resolve_group_columns(data: SurvivalDataset, by: str) -> list[int]:
    names = data.covariate_names
    if by in names:
        return [1 + names.index(by)]
    prefixed = [1 + j for j, n in enumerate(names) if n.startswith(by)]
    if not prefixed:
        raise InputError(f"no covariate column matches --by {by!r}")
    return prefixed


def _grouped_curves(data: SurvivalDataset, by: str | None):
    """Label -> (curve, row mask).  Groups are distinct rows of the --by columns."""
    if by is None:
        mask = np.ones(data.n, dtype=bool)
        return {"all": (kaplan_meier(data), mask)}
    cols = _resolve_group_columns(data, by)
    keys = data.X[:, cols]
    out = {}
    for level in np.unique(keys, axis=0):
        mask = np.all(keys == level, axis=1)
        label = ",".join(
            f"{data.covariate_names[c - 1]}={level[j]:g}" for j, c in enumerate(cols)
        )
        out[label] = (_km_arrays(data.y[mask], data.delta[mask]), mask)
    return out


def _model_from_fit_report(report: dict):
    res = report["results"]["fit"]
    model = res["model"]
    spec = ModelSpec(
        Incidence(model["incidence"]),
        model["latency"],
        model["extra"],
        Link(model["link"]),
    )
    estimates = res["estimates"]
    values = np.array(list(estimates.values()), dtype=float)
    lam = ParamVector(beta=values[:-2], eta=values[-2], phi=values[-1])
    return spec, lam, tuple(res.get("covariate_names", []))


def cmd_km(args) -> int:
    out = _ensure_out(args)
    data = read_survival_csv(args.data)
    curves = _grouped_curves(data, args.by)

    rows = []
    for label, (curve, _) in sorted(curves.items()):
        for t, s, r, d in curve.step_table():
            rows.append([label, repr(float(t)), repr(float(s)), int(r), int(d)])
    write_table_csv(
        out / "km_curves.csv", ["group", "time", "survival", "n_risk", "n_event"], rows
    )
    for label, (curve, _) in sorted(curves.items()):
        print(f"group {label}: plateau={curve.plateau:.4f} ({curve.times.size} event times)")

    results: dict = {
        "groups": {
            label: {"plateau": curve.plateau, "n_event_times": int(curve.times.size)}
            for label, (curve, _) in sorted(curves.items())
        }
    }

    fitted = {}
    if args.overlay:
        report_in = RunReport.load(args.overlay)
        spec, lam, fit_covs = _model_from_fit_report(report_in)
        if spec.latency == "weibull":
            raise InputError("overlay of Weibull fits is not supported")
        if tuple(fit_covs) != tuple(data.covariate_names):
            raise InputError(
                "fit report covariates "
                f"{list(fit_covs)} do not match data columns {list(data.covariate_names)}"
            )
        kernel = DensityGenerator(LATENCY_FAMILY_ALIASES[spec.latency], spec.extra)
        model = CureModel(
            spec.incidence_model(), LogSymmetricDist(kernel, lam.eta, lam.phi)
        )
        t_grid = np.linspace(1e-6, float(data.y.max()), 200)
        overlay_rows = []
        for label, (curve, mask) in sorted(curves.items()):
            profile = data.X[mask].mean(axis=0)
            theta = apply_link(spec.incidence_model(), lam.beta, profile)
            sp = np.asarray(model.survival_p(theta, t_grid))
            fitted[label] = (t_grid, sp)
            for t, s in zip(t_grid, sp):
                overlay_rows.append([label, repr(float(t)), repr(float(s))])
        write_table_csv(
            out / "km_overlay.csv", ["group", "time", "fitted_survival"], overlay_rows
        )
        results["overlay"] = {"fit_report": _portable_path(args.overlay, out)}

    if not args.no_figures:
        km_only = {label: curve for label, (curve, _) in curves.items()}
        if fitted:
            plot_km_overlay(km_only, fitted, out / "km_overlay.png")
        plot_km(km_only, out / "km.png")

    report = RunReport(
        command="km",
        args={
            "data": _portable_path(args.data, out),
            "by": args.by,
            "overlay": _portable_path(args.overlay, out),
        },
        seed=args.seed,
        results=results,
    )
    report.write(out / "km_report.json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo


def _generate_demo_dataset(seed: int) -> SurvivalDataset:
    """Synthetic stand-in cohort drawn from the final mixture model.

    263 records, three diagnosis groups with fixed frequencies, overall
    censoring near 44%.  This is synthetic data, not the original cohort.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xDE30]))
    kernel = DensityGenerator(LATENCY_FAMILY_ALIASES["logt"], DEMO_NU)
    latency = LogSymmetricDist(kernel, DEMO_ETA, DEMO_PHI)
    inc = IncidenceModel(Incidence.BERNOULLI, Link.LOGISTIC)

    freqs = np.array([g[3] for g in DEMO_GROUPS])
    group = rng.choice(len(DEMO_GROUPS), size=DEMO_N, p=freqs / freqs.sum())
    X = np.ones((DEMO_N, 3))
    X[:, 1] = [DEMO_GROUPS[g][1] for g in group]
    X[:, 2] = [DEMO_GROUPS[g][2] for g in group]
    theta = np.asarray(apply_link(inc, DEMO_BETA, X))

    cured = rng.uniform(size=DEMO_N) < theta
    t_true = np.where(cured, np.inf, latency.sample(rng, DEMO_N))

    # censoring bound targeting ~44% total censoring given the cure mix
    marginal_cf = float(np.sum(freqs / freqs.sum() * np.asarray(
        [apply_link(inc, DEMO_BETA, np.array([1.0, g[1], g[2]])) for g in DEMO_GROUPS]
    )))
    target_cp = (DEMO_TARGET_CENSORING - marginal_cf) / (1.0 - marginal_cf)
    pilot = latency.sample(rng, 20_000)
    lo, hi = 1e-9, 1e6 * DEMO_ETA
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        cp = float(np.mean(np.minimum(pilot / mid, 1.0)))
        if abs(cp - target_cp) < 5e-4:
            break
        if cp > target_cp:
            lo = mid
        else:
            hi = mid
    u = mid
    c = rng.uniform(0.0, u, size=DEMO_N)
    y = np.minimum(t_true, c)
    delta = (t_true <= c).astype(float)
    return SurvivalDataset(y=y, delta=delta, X=X, covariate_names=("LC1", "LC2"))


def cmd_demo(args) -> int:
    out = _ensure_out(args)
    data = _generate_demo_dataset(args.seed)
    csv_path = out / "demo_data.csv"
    write_survival_csv(data, csv_path)
    censoring = float(np.mean(data.delta == 0.0))
    print(
        f"synthetic cohort: n={data.n}, events={data.n_events},"
        f" censoring={censoring:.3f} (synthetic stand-in, not the original data)"
    )

    ns = argparse.Namespace
    rc = cmd_select(
        ns(
            data=csv_path,
            grid="paper-table8",
            criterion="aic",
            covariates="none",
            starts=1,
            seed=args.seed,
            out=out,
        )
    )
    if rc != EXIT_OK:
        return rc
    rc = cmd_fit(
        ns(
            data=csv_path,
            incidence="bernoulli",
            latency="logt",
            extra=DEMO_NU,
            link=None,
            covariates="LC1,LC2",
            starts=3,
            seed=args.seed,
            out=out,
        )
    )
    if rc != EXIT_OK:
        return rc
    return cmd_km(
        ns(
            data=csv_path,
            by="LC",
            overlay=out / "fit_report.json",
            no_figures=args.no_figures,
            seed=args.seed,
            out=out,
        )
    )


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logsymcure",
        description="Log-symmetric cure-fraction survival models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("data", help="input CSV (time,status,covariates...)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".", help="output directory")

    p_fit = sub.add_parser("fit", help="fit one cure model by maximum likelihood")
    common(p_fit)
    p_fit.add_argument("--incidence", required=True, choices=[i.value for i in Incidence])
    p_fit.add_argument(
        "--latency",
        required=True,
        choices=sorted(LATENCY_FAMILY_ALIASES) + ["weibull"],
    )
    p_fit.add_argument("--extra", type=float, default=None)
    p_fit.add_argument("--link", choices=[l.value for l in Link], default=None)
    p_fit.add_argument("--covariates", default=None, help="comma list or 'none'")
    p_fit.add_argument("--starts", type=int, default=5)
    p_fit.set_defaults(func=cmd_fit)

    p_sel = sub.add_parser("select", help="rank a model grid by AIC/BIC")
    common(p_sel)
    p_sel.add_argument("--grid", default="paper-table8")
    p_sel.add_argument("--criterion", choices=["aic", "bic"], default="aic")
    p_sel.add_argument("--covariates", default="none")
    p_sel.add_argument("--starts", type=int, default=2)
    p_sel.set_defaults(func=cmd_select)

    p_sim = sub.add_parser("simulate", help="Monte Carlo estimator study")
    common(p_sim, data=False)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--cp", type=float, required=True, help="percent, e.g. 15")
    p_sim.add_argument("--cf", type=int, required=True, help="percent; 10 or 30")
    p_sim.add_argument("--replicates", type=int, default=200)
    p_sim.add_argument("--incidence", default="poisson", choices=[i.value for i in Incidence])
    p_sim.add_argument("--latency", default="lognormal", choices=sorted(LATENCY_FAMILY_ALIASES))
    p_sim.add_argument("--extra", type=float, default=None)
    p_sim.add_argument("--link", choices=[l.value for l in Link], default=None)
    p_sim.add_argument("--eta", type=float, default=5.0)
    p_sim.add_argument("--phi", type=float, default=1.0)
    p_sim.add_argument("--beta", default=None, help="comma list overriding the cf preset")
    p_sim.add_argument("--starts", type=int, default=2)
    p_sim.set_defaults(func=cmd_simulate)

    p_km = sub.add_parser("km", help="Kaplan-Meier curves and fitted overlays")
    common(p_km)
    p_km.add_argument("--by", default=None, help="covariate column (or prefix) to group by")
    p_km.add_argument("--overlay", default=None, help="fit report JSON to overlay")
    p_km.add_argument("--no-figures", action="store_true")
    p_km.set_defaults(func=cmd_km)

    p_demo = sub.add_parser("demo", help="synthetic end-to-end pipeline")
    common(p_demo, data=False)
    p_demo.add_argument("--no-figures", action="store_true")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        rc = args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FitFailure as exc:
        print(f"fit failure: {exc}", file=sys.stderr)
        return EXIT_FIT
    print(f"done in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
