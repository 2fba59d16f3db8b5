# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""The four experiment commands. Each writes one run directory and returns its RunRecord."""

import json
import logging

import numpy as np
import pandas as pd

from utils_spde.cli.records import RunRecord, make_run_dir
from utils_spde.common.exceptions import (
    ConfigInvalid,
    FitUndefined,
    InvalidArgument,
    SpdeLabError,
)
from utils_spde.eval.plots import plot_log_moments, plot_rates
from utils_spde.heatkernel.certify import certify_propositions, summarize_certification
from utils_spde.heatkernel.kernel import KernelEvaluator
from utils_spde.moments.estimation import SUP_D, MomentTable, estimate_moments
from utils_spde.moments.fitting import critical_lambda, excitation_index, lyapunov_fit
from utils_spde.noise.models import NoiseKind
from utils_spde.secondmoment.chaos import fit_chaos_constants, simplex_integral
from utils_spde.secondmoment.field import SecondMomentField
from utils_spde.secondmoment.gronwall import gronwall_verify
from utils_spde.secondmoment.kernels import uniform_grid
from utils_spde.secondmoment.volterra import (
    lyapunov_rate_from_field,
    picard_chaos_terms,
    picard_tail_bound,
    renewal_solve_white,
    volterra_solve_colored,
)
from utils_spde.solver.paths import prepare_setup, simulate_paths
from utils_spde.solver.specs import SigmaKind
from utils_spde.spectral.basis import export_basis_csv
from utils_spde.spectral.checks import (
    check_eigenvalue_growth,
    check_first_eigenfunction_bound,
    check_spectral_gap,
)

logger = logging.getLogger(__name__)

GRONWALL_T_MAX = 5.0
GRONWALL_STEPS = 200
SIMPLEX_ORDERS = (0, 1, 2, 3, 4)
SIMPLEX_EXPONENTS = (0.0, 0.25, 0.5)


def _run(command, config, body, run_dir=None):
    """Creates the record (and the run directory unless given), runs `body(record)` and
    always saves the record."""
    if run_dir is None:
        run_dir = make_run_dir(config.output_dir, command, config)
    record = RunRecord(run_dir, command, config)
    try:
        body(record)
    except SpdeLabError as e:
        record.fail(e)
        record.save()
        raise
    record.save()
    return record


def _try_fit(record, name, fit, *args, **kwargs):
    """Runs a fit and registers it, or registers why it is undefined."""
    try:
        value = fit(*args, **kwargs)
    except FitUndefined as e:
        logger.warning("Fit {} undefined: {}".format(name, e))
        record.add_fit(name, {"undefined": str(e)})
        return None
    record.add_fit(name, value)
    return value


def _write_csv(record, frame, name):
    frame.to_csv(record.path(name), index=False, lineterminator="\n")
    record.add_file(name)


def _save_json(record, payload, name):
    with open(record.path(name), "w", encoding="utf8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    record.add_file(name)


def _spectral_checks(record, basis):
    checks = {"spectral_gap": check_spectral_gap(basis)}
    checks["first_eigenfunction"] = check_first_eigenfunction_bound(basis)
    try:
        checks["eigenvalue_growth"] = check_eigenvalue_growth(basis)
    except InvalidArgument as e:
        logger.warning("Skipping eigenvalue growth fit: {}".format(e))
    for name, value in checks.items():
        record.add_fit(name, value)
    return checks


def cmd_simulate(config, run_dir=None):
    """Simulates paths for every noise level, estimates moments and fits growth rates.

    Writes moments.csv, fits.json, moments.svg and, with several noise levels, rates.svg.

    Args:
        config (ExperimentConfig): Validated configuration.

    Returns:
        RunRecord: The saved record.
    """

    def body(record):
        with record.timing.stage("setup"):
            setup = prepare_setup(config)
        tables, blow_ups = [], {}
        for lam in config.lambdas:
            with record.timing.stage("simulate"):
                bundle = simulate_paths(
                    config, lam=lam, basis=setup.basis, cov=setup.cov, verbose=config.verbose
                )
            blow_ups[lam] = int(np.sum(bundle.blown_up))
            with record.timing.stage("estimate"):
                tables.append(
                    estimate_moments(
                        bundle, config.p_list, eps=config.epsilon, grid_nodes=setup.grid.nodes
                    )
                )
        table = MomentTable.concat(tables)
        table.to_csv(record.path("moments.csv"))
        record.add_file("moments.csv")
        record.add_fit("blow_up", blow_ups)

        noise_a = (
            1.0
            if setup.cov.model.kind == NoiseKind.WHITE
            else setup.cov.model.scaling_exponent
        )
        rates = {}
        with record.timing.stage("fit"):
            for lam in config.lambdas:
                for p in config.p_list:
                    for side in ("upper", "lower"):
                        fit = _try_fit(
                            record,
                            "lyapunov_p{}_lambda{}_{}".format(p, lam, side),
                            lyapunov_fit,
                            table,
                            p,
                            lam,
                            side=side,
                            alpha=config.alpha,
                            a=noise_a,
                        )
                        if fit is not None and p == 2 and side == "upper":
                            rates[float(lam)] = fit.rate
            if len(rates) > 1:
                _try_fit(record, "critical_lambda", critical_lambda, rates)
                _try_fit(
                    record, "excitation_index", excitation_index, rates, float(setup.basis.mu[0])
                )
        _save_json(record, record.fits, "fits.json")
        plot_log_moments(table, record.path("moments.svg"), aggregate=SUP_D)
        record.add_file("moments.svg")
        if len(rates) > 1:
            plot_rates(rates, record.path("rates.svg"), mu1=float(setup.basis.mu[0]))
            record.add_file("rates.svg")

    return _run("simulate", config, body, run_dir)


def _oracle_grid(config):
    t_max = max(config.times)
    if t_max <= 0:
        raise ConfigInvalid("The oracle needs a positive output time")
    return uniform_grid(t_max, int(np.ceil(t_max / config.oracle_dt - 1e-9)))


def _at_times(field, times):
    """Restricts a field to the grid times nearest to `times`, plus t = 0."""
    indices = sorted({0} | {int(np.argmin(np.abs(field.times - t))) for t in times})
    return SecondMomentField(field.times[indices], field.nodes, field.values[indices], field.lam)


def _solve(setup, config, lam, t_grid, l_or_L):
    if setup.cov.model.kind == NoiseKind.WHITE:
        return renewal_solve_white(
            setup.basis,
            setup.u0,
            lam,
            l_or_L,
            t_grid,
            closure=config.closure,
            verbose=config.verbose,
        )
    return volterra_solve_colored(
        setup.basis,
        setup.cov,
        setup.u0,
        lam,
        t_grid,
        closure=config.closure,
        verbose=config.verbose,
    )


def cmd_oracle(config, run_dir=None):
    """Deterministic oracles: second moments, chaos terms, simplex table and Gronwall reports.

    Writes second_moment_<lambda>.csv per noise level (and per sigma bound for a pinched
    sigma), chaos.csv, simplex.csv and gronwall.json.
    """

    def body(record):
        with record.timing.stage("setup"):
            setup = prepare_setup(config)
        if setup.sigma.kind == SigmaKind.ADDITIVE:
            raise InvalidArgument("The second-moment oracle needs a multiplicative sigma")
        white = setup.cov.model.kind == NoiseKind.WHITE
        if not white and setup.sigma.kind != SigmaKind.LINEAR:
            raise InvalidArgument("The colored oracle needs sigma(u) = u")
        bounds = {"": 1.0}
        if setup.sigma.kind == SigmaKind.PINCHED:
            bounds = {"_lower": setup.sigma.l, "_upper": setup.sigma.L}
        t_grid = _oracle_grid(config)
        x0 = float(setup.grid.nodes[setup.grid.nearest_index(0.0)])
        rates = {}
        for lam in config.lambdas:
            for suffix, l_or_L in bounds.items():
                with record.timing.stage("second_moment"):
                    field = _solve(setup, config, lam, t_grid, l_or_L)
                name = "second_moment_lambda{}{}.csv".format(lam, suffix)
                _at_times(field, config.times).to_csv(record.path(name))
                record.add_file(name)
                fit = _try_fit(
                    record,
                    "oracle_rate_lambda{}{}".format(lam, suffix),
                    lyapunov_rate_from_field,
                    field,
                    x0,
                    (t_grid[-1] / 2.0, t_grid[-1]),
                )
                if fit is not None and suffix in ("", "_upper"):
                    rates[float(lam)] = fit.rate
        if len(rates) > 1:
            _try_fit(record, "oracle_critical_lambda", critical_lambda, rates)

        lam = max(config.lambdas)
        with record.timing.stage("chaos"):
            terms = picard_chaos_terms(
                setup.basis,
                setup.u0,
                lam,
                t_grid,
                config.n_max,
                cov=None if white else setup.cov,
                l_or_L=max(bounds.values()),
                nodes=[x0],
            )
        tail = picard_tail_bound(terms) if len(terms) > 1 else np.zeros_like(terms[0].values)
        rows = [
            (term.n, t, x0, lam, term.values[i, 0])
            for term in terms
            for i, t in enumerate(term.times)
        ]
        chaos = pd.DataFrame.from_records(rows, columns=["n", "t", "x", "lambda", "value"])
        _write_csv(record, chaos, "chaos.csv")
        record.add_fit("picard_tail_bound_final", float(tail[-1, 0]))
        if lam > 0 and len(terms) > 1:
            beta = 1.0 if white else setup.cov.model.scaling_exponent
            try:
                constants = fit_chaos_constants(
                    terms, lam, config.alpha, beta, mu1=float(setup.basis.mu[0]), x=x0
                )
                record.add_fit("chaos_constants", constants)
            except InvalidArgument as e:
                logger.warning("Chaos constants not fitted: {}".format(e))

        simplex = pd.DataFrame.from_records(
            [
                (n, a, b, 1.0, simplex_integral(n, a, b, 1.0))
                for n in SIMPLEX_ORDERS
                for a in SIMPLEX_EXPONENTS
                for b in SIMPLEX_EXPONENTS
            ],
            columns=["n", "a_over_alpha", "b_over_alpha", "t", "value"],
        )
        _write_csv(record, simplex, "simplex.csv")

        with record.timing.stage("gronwall"):
            g_grid = np.linspace(0.0, GRONWALL_T_MAX, GRONWALL_STEPS + 1)
            reports = [
                gronwall_verify(rho, config.gronwall_k, config.gronwall_c1, g_grid, direction)
                for rho in config.rho_list
                for direction in ("upper", "lower")
            ]
        _save_json(record, [r._asdict() for r in reports], "gronwall.json")

    return _run("oracle", config, body, run_dir)


def cmd_certify(config, run_dir=None):
    """Heat-kernel proposition sweeps and spectral checks.

    Writes certification.csv with the fitted constant of every quantity and
    certification_summary.csv.
    """

    def body(record):
        with record.timing.stage("setup"):
            setup = prepare_setup(config)
            ke = KernelEvaluator(setup.basis)
        _spectral_checks(record, setup.basis)
        with record.timing.stage("certify"):
            frame = certify_propositions(
                ke,
                setup.cov,
                eps=config.epsilon,
                delta=config.delta,
                times=config.certify_times,
                verbose=config.verbose,
            )
        _write_csv(record, frame, "certification.csv")
        summary = summarize_certification(frame)
        _write_csv(record, summary, "certification_summary.csv")
        for row in summary.itertuples(index=False):
            record.add_fit(
                "certify_{}".format(row.quantity),
                {
                    "fitted_constant": row.fitted_constant,
                    "ratio": row.ratio,
                    "certified": row.certified,
                },
            )

    return _run("certify", config, body, run_dir)


def cmd_basis(config, run_dir=None):
    """Writes basis.csv and the spectral checks of the configured basis."""

    def body(record):
        with record.timing.stage("basis"):
            setup = prepare_setup(config)
        export_basis_csv(setup.basis, record.path("basis.csv"))
        record.add_file("basis.csv")
        _spectral_checks(record, setup.basis)

    return _run("basis", config, body, run_dir)


COMMANDS = {
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "certify": cmd_certify,
    "basis": cmd_basis,
}
