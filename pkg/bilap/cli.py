"""
Command-line entry point.

    bilap thresholds|eigenvalue|sweep|fit|oracle|appendix-verify --config run.json [--out DIR] [--format csv|json]
    bilap fixtures

A run configuration is one JSON document:

    {
      "problem": {"d": 1, "generator": {"fixture": "delta"}, "method": "grid"},
      "quadrature": {"tol_q": 1e-12, "n_max": 4096},
      "sweep": {"ladder": {"mu_start": 1e-2, "ratio": 0.5, "count": 8, "side": "bottom"}},
      "output": {"dir": "out", "format": "csv"}
    }

with exactly one command block, named after the subcommand.
"""
import argparse
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import ujson as json

from bilap import __version__
from bilap.asymptotics import (
    EXPONENTIAL,
    classify_case,
    fit_exponent,
    leading_constant,
    predict_e_leading,
    resonance_report,
)
from bilap.config import config
from bilap.core_model import GeneratorPotential, dispersion, morse_map
from bilap.fixtures import fixture_table, get_fixture
from bilap.helpers import const
from bilap.helpers.exceptions import (
    BilapBaseException,
    CheckFailed,
    ConfigError,
    GeneratorError,
    MissingIngredient,
)
from bilap.helpers.utils import Utils
from bilap.lattice_oracle import oracle_compare, realspace_planewave_check
from bilap.quadrature import TorusGrid, jm_integral, jm_singular_part
from bilap.reports import Report, save_report
from bilap.spectral_solver import (
    EigenResult,
    GridSecularFunction,
    SpectralProblem,
    convergence_verdicts,
    e_prime_analytic,
    eigenfunction_residual,
    eigenvalue_solve,
    sweep,
    uniqueness_probe,
)

logger = logging.getLogger(__name__)

COMMANDS = ("thresholds", "eigenvalue", "sweep", "fit", "oracle", "appendix-verify")
IDENTITY_TOL = 1e-12
ORACLE_DIFF_TOL = 1e-10
JM_CONSTANT_TOL = 1e-3
JM_BOUND = 1.0


def _block_name(command: str) -> str:
    return command.replace("-", "_")


@dataclass(frozen=True)
class LadderSpec:
    mu_start: float
    ratio: float
    count: int
    side: str = const.BOTTOM
    # offsets measured from the coupling threshold instead of from 0
    from_threshold: bool = False

    @classmethod
    def parse(cls, data: Dict, path: str) -> "LadderSpec":
        if not isinstance(data, dict):
            raise ConfigError(path, "ladder must be an object")
        mu_start = _number(data, "mu_start", path)
        ratio = _number(data, "ratio", path)
        count = _integer(data, "count", path)
        side = data.get("side", const.BOTTOM)
        if not mu_start > 0:
            raise ConfigError(f"{path}.mu_start", f"must be positive, got {mu_start}")
        if not 0.0 < ratio < 1.0:
            raise ConfigError(f"{path}.ratio", f"must lie in (0, 1), got {ratio}")
        if count < 1:
            raise ConfigError(f"{path}.count", f"must be positive, got {count}")
        if side not in const.SIDES:
            raise ConfigError(f"{path}.side", f"must be one of {const.SIDES}, got {side!r}")
        return cls(
            mu_start=mu_start,
            ratio=ratio,
            count=count,
            side=side,
            from_threshold=bool(data.get("from_threshold", False)),
        )

    def mu_list(self, prob: SpectralProblem) -> List[float]:
        offsets = Utils.geometric_ladder(self.mu_start, self.ratio, self.count)
        if self.side == const.BOTTOM:
            base = prob.thresholds.mu_lower if self.from_threshold else 0.0
            return [base + offset for offset in offsets]
        base = -prob.thresholds.mu_upper if self.from_threshold else 0.0
        return [base - offset for offset in offsets]


@dataclass
class RunConfig:
    command: str
    block: Dict
    problem: Optional[SpectralProblem]
    output_dir: Path
    fmt: str
    raw: Dict = field(default_factory=dict)


def _number(data: Dict, key: str, path: str, default: Optional[float] = None) -> float:
    value = data.get(key, default)
    if value is None:
        raise ConfigError(f"{path}.{key}", "is required")
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path}.{key}", f"must be a finite number, got {value!r}")
    return float(value)


def _integer(data: Dict, key: str, path: str, default: Optional[int] = None) -> int:
    value = data.get(key, default)
    if value is None:
        raise ConfigError(f"{path}.{key}", "is required")
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}", f"must be an integer, got {value!r}")
    return value


def _parse_generator(data, d: int, base_dir: Path) -> GeneratorPotential:
    path = "problem.generator"
    if not isinstance(data, dict):
        raise ConfigError(path, "must be an object")
    try:
        if "fixture" in data:
            return get_fixture(data["fixture"], d)
        if "file" in data:
            file_path = Path(data["file"])
            if not file_path.is_absolute():
                file_path = base_dir.joinpath(file_path)
            if not file_path.exists():
                raise ConfigError(f"{path}.file", f"{file_path} does not exist")
            gen = GeneratorPotential.load(file_path)
        else:
            gen = GeneratorPotential.from_json_dict(dict(data, d=data.get("d", d)))
    except GeneratorError as ex:
        raise ConfigError(path, str(ex)) from ex
    if gen.d != d:
        raise ConfigError(path, f"generator has dimension {gen.d}, problem.d is {d}")
    return gen


def _parse_problem(raw: Dict, base_dir: Path) -> SpectralProblem:
    problem = raw.get("problem")
    if not isinstance(problem, dict):
        raise ConfigError("problem", "block is required")
    d = _integer(problem, "d", "problem")
    if not 1 <= d <= config.MAX_DIMENSION:
        raise ConfigError("problem.d", f"must lie in 1..{config.MAX_DIMENSION}, got {d}")
    gen = _parse_generator(problem.get("generator"), d, base_dir)
    method = problem.get("method", const.GRID_METHOD)
    if method not in const.METHODS:
        raise ConfigError("problem.method", f"must be one of {const.METHODS}, got {method!r}")
    quadrature = raw.get("quadrature", {})
    if not isinstance(quadrature, dict):
        raise ConfigError("quadrature", "must be an object")
    tol_q = _number(quadrature, "tol_q", "quadrature", config.QUADRATURE_TOL)
    n_max = _integer(quadrature, "n_max", "quadrature", config.GRID_N_MAX)
    if not tol_q > 0:
        raise ConfigError("quadrature.tol_q", f"must be positive, got {tol_q}")
    if n_max < 8:
        raise ConfigError("quadrature.n_max", f"must be at least 8, got {n_max}")
    return SpectralProblem(d=d, generator=gen, tol_q=tol_q, n_max=n_max, method=method)


def parse_run_config(
    raw: Dict, command: str, base_dir: Path = Path("."), out: Optional[str] = None, fmt: Optional[str] = None
) -> RunConfig:
    """
    Validates a run configuration for one subcommand
    :param raw: decoded JSON document
    :param command: subcommand name
    :param base_dir: directory generator files are resolved against
    :param out: overrides output.dir
    :param fmt: overrides output.format
    :return:
    :raises ConfigError: names the offending field
    """
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be an object")
    blocks = [name for name in map(_block_name, COMMANDS) if name in raw]
    if len(blocks) != 1:
        raise ConfigError("config", f"exactly one command block is required, found {blocks}")
    if blocks[0] != _block_name(command):
        raise ConfigError(blocks[0], f"block does not belong to the {command!r} command")
    block = raw[blocks[0]]
    if not isinstance(block, dict):
        raise ConfigError(blocks[0], "must be an object")

    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigError("output", "must be an object")
    output_dir = Path(out or output.get("dir", "."))
    fmt = fmt or output.get("format", const.JSON_FORMAT)
    if fmt not in const.FORMATS:
        raise ConfigError("output.format", f"must be one of {const.FORMATS}, got {fmt!r}")

    problem = None
    if "problem" in raw or command != "appendix-verify":
        problem = _parse_problem(raw, base_dir)
    return RunConfig(command=command, block=block, problem=problem, output_dir=output_dir, fmt=fmt, raw=raw)


def load_run_config(path: str, command: str, out: Optional[str] = None, fmt: Optional[str] = None) -> RunConfig:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError("--config", f"{config_path} does not exist")
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except ValueError as ex:
        raise ConfigError("config", f"{config_path} is not valid JSON: {ex}") from ex
    return parse_run_config(raw, command, base_dir=config_path.parent, out=out, fmt=fmt)


def _mu_list(block: Dict, prob: SpectralProblem, name: str) -> List[float]:
    if "mu_list" in block:
        values = block["mu_list"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{name}.mu_list", "must be a non-empty list")
        return [_number({"mu": v}, "mu", f"{name}.mu_list") for v in values]
    if "ladder" in block:
        return LadderSpec.parse(block["ladder"], f"{name}.ladder").mu_list(prob)
    raise ConfigError(name, "needs mu_list or ladder")


def _predictions(report) -> Dict:
    result = {}
    for edge in const.SIDES:
        case = classify_case(report, edge)
        try:
            result[edge] = leading_constant(report, case).to_json_dict()
        except MissingIngredient as ex:
            result[edge] = {"case": case.to_json_dict(), "missing": str(ex)}
    return result


def cmd_thresholds(run: RunConfig) -> Report:
    prob = run.problem
    report = prob.thresholds
    states = resonance_report(report, convergence_verdicts(prob))
    payload = {
        "generator": prob.generator.to_json_dict(),
        "thresholds": report.to_json_dict(),
        "classification": states.to_json_dict(),
        "predictions": _predictions(report),
    }
    return Report(command=run.command, run_config=run.raw, payload=payload)


def cmd_eigenvalue(run: RunConfig) -> Report:
    prob = run.problem
    mu = _number(run.block, "mu", "eigenvalue")
    outcome = eigenvalue_solve(prob, mu)
    if not isinstance(outcome, EigenResult):
        return Report(
            command=run.command,
            run_config=run.raw,
            payload=outcome.to_json_dict(),
            status=const.STATUS_NO_DISCRETE_SPECTRUM,
        )
    payload = {
        "result": outcome.to_json_dict(),
        "e_prime_analytic": e_prime_analytic(prob, mu, outcome.e),
        "eigenfunction_residual": eigenfunction_residual(prob, mu, outcome),
    }
    if run.block.get("uniqueness_probe", False):
        payload["sign_changes"] = uniqueness_probe(prob, mu, outcome)
    return Report(command=run.command, run_config=run.raw, payload=payload)


def cmd_sweep(run: RunConfig) -> Report:
    prob = run.problem
    mu_list = _mu_list(run.block, prob, "sweep")
    result = sweep(prob, mu_list, finite_difference=bool(run.block.get("finite_difference", False)))
    failed = [row for row in result.rows if row.status == const.STATUS_ERROR]
    return Report(
        command=run.command,
        run_config=run.raw,
        payload=result.to_json_dict(),
        status=const.STATUS_ERROR if failed else const.STATUS_OK,
        exit_code=const.EXIT_NUMERICAL_FAILURE if failed else const.EXIT_OK,
        table=[row.to_row() for row in result.rows],
        columns=const.SWEEP_COLUMNS,
    )


def cmd_fit(run: RunConfig) -> Report:
    prob = run.problem
    if "ladder" not in run.block:
        raise ConfigError("fit.ladder", "is required")
    ladder = LadderSpec.parse(run.block["ladder"], "fit.ladder")
    report = prob.thresholds
    edge = ladder.side
    case = classify_case(report, edge)
    threshold = report.mu_lower if edge == const.BOTTOM else -report.mu_upper
    result = sweep(prob, ladder.mu_list(prob))
    fit = fit_exponent(result.results, edge, threshold, case)
    try:
        prediction = leading_constant(report, case)
    except MissingIngredient as ex:
        logger.warning("no leading constant: %s", ex)
        prediction = None

    table = [{"quantity": "family", "predicted": case.family, "fitted": fit.model}]
    if case.kind == EXPONENTIAL:
        table.append(
            {
                "quantity": "rate",
                "predicted": None if prediction is None else prediction.leading_constant,
                "fitted": fit.exponent_hat,
            }
        )
        table.append({"quantity": "multiplicative constant", "predicted": None, "fitted": fit.prefactor_hat})
    else:
        table.append(
            {
                "quantity": "gap exponent",
                "predicted": None if prediction is None else float(prediction.gap_exponent),
                "fitted": fit.exponent_hat,
            }
        )
        table.append(
            {
                "quantity": "gap prefactor",
                "predicted": None if prediction is None else prediction.gap_prefactor,
                "fitted": fit.prefactor_hat,
            }
        )
        table.append(
            {
                "quantity": "gap prefactor (morse)",
                "predicted": None if prediction is None else prediction.morse_gap_prefactor,
                "fitted": fit.prefactor_hat,
            }
        )
    table.append({"quantity": "r_squared", "predicted": None, "fitted": fit.r_squared})
    for row in table:
        numeric = all(isinstance(row[key], (int, float)) for key in ("predicted", "fitted"))
        row["rel_diff"] = Utils.relative_diff(row["predicted"], row["fitted"]) if numeric else None
    comparison = []
    if prediction is not None:
        for item in result.results:
            comparison.append({"mu": item.mu, "e": item.e, "e_pred": predict_e_leading(prediction, item.mu, report)})
    payload = {
        "thresholds": report.to_json_dict(),
        "prediction": None if prediction is None else prediction.to_json_dict(),
        "fit": fit.to_json_dict(),
        "sweep": result.to_json_dict(),
        "leading_order": comparison,
    }
    return Report(
        command=run.command,
        run_config=run.raw,
        payload=payload,
        table=table,
        columns=("quantity", "predicted", "fitted", "rel_diff"),
    )


def cmd_oracle(run: RunConfig) -> Report:
    prob = run.problem
    block = run.block
    mus = block.get("mu", [1.0])
    mus = mus if isinstance(mus, list) else [mus]
    mus = [_number({"mu": mu}, "mu", "oracle") for mu in mus]
    n = _integer(block, "N", "oracle", 16)
    levels = _integer(block, "levels", "oracle", 3)
    if n < 4 or levels < 1:
        raise ConfigError("oracle.N", f"needs N >= 4 and levels >= 1, got N={n}, levels={levels}")
    reports, table, failures = [], [], []
    for mu in mus:
        result = oracle_compare(prob, mu, n, levels)
        reports.append(result.to_json_dict())
        for row in result.rows:
            table.append(dict(row.to_row(), mu=mu))
            if row.abs_diff is not None and row.abs_diff > ORACLE_DIFF_TOL * max(1.0, abs(row.e_secular)):
                failures.append(f"mu={mu}, N={row.n}: |e_secular - e_matrix| = {row.abs_diff:.3e}")
    failed = bool(failures)
    return Report(
        command=run.command,
        run_config=run.raw,
        payload={"comparisons": reports, "failures": failures},
        status="check_failed" if failed else const.STATUS_OK,
        exit_code=const.EXIT_CHECK_FAILED if failed else const.EXIT_OK,
        table=table,
        columns=("mu",) + const.ORACLE_COLUMNS,
    )


def _suite(name: str, deviation: float, tolerance: float, samples: int, **extra) -> Dict:
    return dict(
        name=name, passed=bool(deviation <= tolerance), max_deviation=deviation, tolerance=tolerance, samples=samples, **extra
    )


def verify_jm_constants(z: float = -1e-8) -> List[Dict]:
    a = -z
    checks = (
        ("j_0 constant pi/4", a ** 0.75 * jm_integral(0, z), math.pi / 4.0),
        ("j_1 constant pi/8", a ** 0.5 * jm_integral(1, z), math.pi / 8.0),
        ("j_3 constant 1/16", jm_integral(3, z) / -math.log(a), 1.0 / 16.0),
    )
    return [_suite(name, abs(value - target), JM_CONSTANT_TOL, 1, value=value) for name, value, target in checks]


def verify_jm_bounded(exponents: Sequence[int] = tuple(range(2, 9))) -> List[Dict]:
    """j_m minus its singular part along z = -10^{-2}, ..., -10^{-8}, m = 0..7"""
    zs = [-(10.0 ** -k) for k in exponents]
    suites = []
    for m in range(8):
        remainders = [jm_integral(m, z) - jm_singular_part(m, z) for z in zs]
        suites.append(_suite(f"j_{m} remainder bounded", max(abs(r) for r in remainders), JM_BOUND, len(zs), remainders=remainders))
    return suites


def verify_morse(rng: np.random.Generator, samples: int) -> Dict:
    deviation = 0.0
    for d in range(1, 4):
        y = rng.uniform(-1.0, 1.0, size=(samples, d))
        y *= (rng.uniform(0.0, 1.0, size=(samples, 1)) / math.sqrt(2.0)) / np.linalg.norm(y, axis=1, keepdims=True)
        lhs = dispersion(morse_map(y))
        rhs = 4.0 * np.sum(y ** 2, axis=1) ** 2
        deviation = max(deviation, float(np.max(np.abs(lhs - rhs))))
    return _suite("morse identity e(phi(y)) = 4|y|^4", deviation, IDENTITY_TOL, 3 * samples)


def verify_top_factorization(rng: np.random.Generator, samples: int) -> Dict:
    deviation = 0.0
    for d in range(1, 4):
        q = rng.uniform(-math.pi, math.pi, size=(samples, d))
        lhs = dispersion(q) - 4.0 * d ** 2
        rhs = -np.sum(3.0 - np.cos(q), axis=1) * np.sum(1.0 + np.cos(q), axis=1)
        deviation = max(deviation, float(np.max(np.abs(lhs - rhs))))
    return _suite("top factorization", deviation, IDENTITY_TOL, 3 * samples)


def verify_plane_waves(rng: np.random.Generator, samples: int, n: int = 8) -> Dict:
    deviation = 0.0
    for _ in range(samples):
        d = int(rng.integers(1, 4))
        k = [int(c) for c in rng.integers(0, n, size=d)]
        deviation = max(deviation, realspace_planewave_check(d, n, k).deviation)
    return _suite("plane-wave stencil diagonalization", deviation, IDENTITY_TOL, samples)


def verify_scaling(rng: np.random.Generator, samples: int, gen: GeneratorPotential) -> Dict:
    """Δ_N(μ; z) for v̂ against Δ_N(μ/t²; z) for t v̂ on a fixed grid"""
    d = gen.d
    grid = TorusGrid(d, config.DIVERGENCE_BASE_N[d])
    base = GridSecularFunction(gen, grid)
    band_top = 4.0 * d ** 2
    deviation = 0.0
    for _ in range(samples):
        t = 10.0 ** rng.uniform(-1.0, 1.0)
        mu = (1.0 if rng.uniform() < 0.5 else -1.0) * 10.0 ** rng.uniform(-2.0, 2.0)
        distance = 10.0 ** rng.uniform(-3.0, 1.0)
        z = -distance if rng.uniform() < 0.5 else band_top + distance
        scaled = GridSecularFunction(gen.scaled(t), grid)
        integral = float(base.integrals(z)[0])
        lhs = 1.0 - mu * integral
        rhs = scaled.value(mu / t ** 2, z)
        deviation = max(deviation, abs(lhs - rhs) / (1.0 + abs(mu * integral)))
    return _suite("scaling covariance (v, mu) -> (t v, mu/t^2)", deviation, IDENTITY_TOL, samples)


def cmd_appendix_verify(run: RunConfig) -> Report:
    block = run.block
    samples = _integer(block, "samples", "appendix_verify", 10000)
    seed = _integer(block, "seed", "appendix_verify", 0)
    gen = run.problem.generator if run.problem is not None else get_fixture("delta", 1)
    rng = np.random.default_rng(seed)
    suites = verify_jm_constants() + verify_jm_bounded()
    suites += [
        verify_morse(rng, samples),
        verify_top_factorization(rng, samples),
        verify_plane_waves(rng, samples),
        verify_scaling(rng, samples, gen),
    ]
    failed = [suite["name"] for suite in suites if not suite["passed"]]
    if failed:
        logger.warning("identity suites failed: %s", failed)
    return Report(
        command=run.command,
        run_config=run.raw,
        payload={"suites": suites, "failed": failed},
        status="check_failed" if failed else const.STATUS_OK,
        exit_code=const.EXIT_CHECK_FAILED if failed else const.EXIT_OK,
        table=[{key: suite[key] for key in ("name", "passed", "max_deviation", "tolerance", "samples")} for suite in suites],
        columns=("name", "passed", "max_deviation", "tolerance", "samples"),
    )


HANDLERS: Dict[str, Callable[[RunConfig], Report]] = {
    "thresholds": cmd_thresholds,
    "eigenvalue": cmd_eigenvalue,
    "sweep": cmd_sweep,
    "fit": cmd_fit,
    "oracle": cmd_oracle,
    "appendix-verify": cmd_appendix_verify,
}


def run_command(run: RunConfig) -> Report:
    started = time.perf_counter()
    report = HANDLERS[run.command](run)
    report.timings["total_seconds"] = time.perf_counter() - started
    return report


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bilap", description="Discrete bilaplacian with a rank-one potential")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", required=True, help="run configuration (JSON)")
        sub.add_argument("--out", help="output directory, overrides output.dir")
        sub.add_argument("--format", choices=const.FORMATS, help="overrides output.format")
        sub.add_argument("--log-level", default=None, help="logging level, config.LOG_LEVEL by default")
    fixtures = subparsers.add_parser("fixtures", help="list the named generators")
    fixtures.add_argument("--log-level", default=None)
    return parser


def _setup_logging(level: Optional[str]) -> None:
    level = (level or config.LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(asctime)s %(name)s %(levelname)s %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level)
    if args.command == "fixtures":
        print(json.dumps(fixture_table(), indent=2))
        return const.EXIT_OK
    try:
        run = load_run_config(args.config, args.command, out=args.out, fmt=args.format)
        report = run_command(run)
        paths = save_report(report, run.output_dir, run.fmt)
    except ConfigError as ex:
        logger.error("config error: %s", ex)
        print(f"config error: {ex}", file=sys.stderr)
        return const.EXIT_CONFIG_ERROR
    except CheckFailed as ex:
        logger.error("check failed: %s", ex)
        print(f"check failed: {ex}", file=sys.stderr)
        return const.EXIT_CHECK_FAILED
    except BilapBaseException as ex:
        logger.error("%s: %s", type(ex).__name__, ex)
        print(f"{type(ex).__name__}: {ex}", file=sys.stderr)
        return const.EXIT_NUMERICAL_FAILURE
    print(json.dumps({"status": report.status, "config_hash": report.config_hash, "files": [str(p) for p in paths]}))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
