"""
Run suites behind the CLI: essential bounds, the identity checks of verify,
coefficient dumps, the two demos and field import/export.
Every suite takes a validated RunConfig and returns a report model; random
draws come from one generator seeded by the config, in a fixed order.
"""

import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import scipy.linalg

from models import (
    CheckResult,
    CoefficientEntry,
    CoefficientReport,
    DemoReport,
    GramianReport,
    RunConfig,
    VerifyReport,
)

from .action import TranslateSystem, analysis_coefficient, translate, trig_parseval
from .check_capture import capture_check
from .errors import UnsupportedGroupError
from .field_io import read_field, write_field
from .group import GroupElement, LatticePoint, lattice_gamma1, preset, rep_apply, rep_matrix
from .oracle import (
    MAX_TRANSLATES,
    cocycle_phase,
    equality_lemma_check,
    homomorphism_check,
    relative_error,
    sumid_check,
    translate_gram,
    unitarity_defect,
)
from .range_function import essential_bounds, membership_residual, orthonormalize_fibers
from .transform import (
    FiberField,
    FieldLayout,
    OperatorField,
    build_generator,
    field_norm,
    fiber_norm,
    make_layout,
    random_field,
    t_transform,
    weight,
)
from .worker_pool import map_ordered


@dataclass(frozen=True, eq=False)
class Run:
    """Everything built from a config before any suite runs"""

    config: RunConfig
    layout: FieldLayout
    fields: Tuple[OperatorField, ...]
    system: TranslateSystem


def prepare_run(config: RunConfig) -> Run:
    group = preset(config.group)
    layout = make_layout(group, config.S, config.q, config.j_half, config.tolerances.pf_eps)
    fields = tuple(
        build_generator(spec, layout, default_seed=config.seed + index)
        for index, spec in enumerate(config.generators)
    )
    system = TranslateSystem.build(
        [t_transform(F) for F in fields],
        lattice_gamma1(group, config.gamma1_radius),
    )
    print(f"🔍 {layout.describe()}; {len(fields)} generator(s), |Gamma_1|={len(system.gamma1)}", file=sys.stderr)
    if config.orthonormalize:
        system = orthonormalize_fibers(system)
    return Run(config=config, layout=layout, fields=fields, system=system)


def run_bounds(config: RunConfig, threads: int = 1) -> GramianReport:
    run = prepare_run(config)
    return essential_bounds(run.system, config.mode, config.tolerances.rank_rel_tol, threads)


def bounds_csv_rows(report: GramianReport) -> Tuple[List[str], List[list]]:
    r = len(report.j_min)
    header = [f"sigma_{i + 1}" for i in range(r)] + ["rank", "lower", "upper"]
    rows = [fb.sigma + [fb.rank, fb.lower, fb.upper] for fb in report.fibers]
    return header, rows


# --- verify ---

def _result(check: str, lhs: float, rhs: float, tolerance: float, floor: float = 0.0) -> CheckResult:
    rel_err = relative_error(lhs, rhs, floor)
    return CheckResult(check=check, lhs=lhs, rhs=rhs, rel_err=rel_err, tolerance=tolerance,
                       passed=bool(rel_err <= tolerance))


def _random_lattice_point(system: TranslateSystem, rng: np.random.Generator) -> LatticePoint:
    k = system.gamma1[int(rng.integers(len(system.gamma1)))]
    m = tuple(int(v) for v in rng.integers(0, system.layout.S, size=system.layout.r))
    return LatticePoint(k=k, m=m)


def _random_lambda(layout: FieldLayout, rng: np.random.Generator) -> np.ndarray:
    kept = np.flatnonzero(layout.mask)
    return layout.lambdas[kept[int(rng.integers(kept.size))]]


@capture_check("parseval_chain")
def check_parseval_chain(run: Run, rng: np.random.Generator) -> CheckResult:
    F = random_field(run.layout, rng)
    return _result("parseval_chain", field_norm(weight(F)) ** 2, fiber_norm(t_transform(F)) ** 2, 1e-12)


@capture_check("translate_unitarity")
def check_translate_unitarity(run: Run, rng: np.random.Generator) -> CheckResult:
    phi = run.system.generators[0]
    gamma = _random_lattice_point(run.system, rng)
    return _result("translate_unitarity", fiber_norm(translate(phi, gamma)), fiber_norm(phi), 1e-12)


@capture_check("sumid")
def check_sumid(run: Run, rng: np.random.Generator) -> CheckResult:
    f = t_transform(random_field(run.layout, rng))
    outcome = sumid_check(f, run.system)
    return _result("sumid", outcome.lhs, outcome.rhs, 1e-9)


def _random_coefficients(system: TranslateSystem, rng: np.random.Generator, count: int = 6):
    coeffs = {}
    for _ in range(count):
        gamma = _random_lattice_point(system, rng)
        index = int(rng.integers(len(system.generators)))
        coeffs[(index, gamma.k, gamma.m)] = complex(rng.standard_normal(), rng.standard_normal())
    return coeffs


@capture_check("equality_lemma")
def check_equality_lemma(run: Run, rng: np.random.Generator) -> CheckResult:
    outcome = equality_lemma_check(_random_coefficients(run.system, rng), run.system)
    return _result("equality_lemma", outcome.lhs, outcome.rhs, 1e-9)


@capture_check("trig_parseval")
def check_trig_parseval(run: Run, rng: np.random.Generator) -> CheckResult:
    n = run.layout.n_sigma
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    lhs, rhs = trig_parseval(a, run.layout)
    return _result("trig_parseval", lhs, rhs, 1e-12)


def _spectral_checks(run: Run, report: GramianReport) -> List[CheckResult]:
    if run.system.size > MAX_TRANSLATES:
        print(f"⚠️  Skipping translate Gram checks: {run.system.size} translates > {MAX_TRANSLATES}", file=sys.stderr)
        return []

    @capture_check("translate_gram_spectrum")
    def spectrum_checks() -> List[CheckResult]:
        oracle = scipy.linalg.eigh(translate_gram(run.system), eigvals_only=True)
        fiber = np.concatenate([fb.eigenvalues for fb in report.fibers])
        scale = float(oracle.max())
        results = [
            _result("spectrum_upper", float(oracle.max()), float(fiber.max()), 1e-9, floor=scale),
            _result("spectrum_lower", float(oracle.min()), float(fiber.min()), 1e-9, floor=scale),
        ]
        if report.mode != "bessel":
            nonzero = oracle[oracle > report.rank_rel_tol * scale]
            results.append(_result("bounds_lower", float(nonzero.min()), report.lower, 1e-9, floor=scale))
        results.append(_result("bounds_upper", scale, report.upper, 1e-9, floor=scale))
        return results

    return spectrum_checks()


@capture_check("homomorphism")
def check_homomorphism(run: Run, rng: np.random.Generator) -> CheckResult:
    layout = run.layout
    lam = _random_lambda(layout, rng)
    a = _random_lattice_point(run.system, rng).element()
    b = _random_lattice_point(run.system, rng).element()
    outcome = homomorphism_check(layout.group, layout.space, lam, a, b)
    return CheckResult(check="homomorphism", lhs=outcome.defect, rhs=0.0, rel_err=outcome.defect,
                       tolerance=1e-10, passed=bool(outcome.defect <= 1e-10))


@capture_check("cocycle_phase")
def check_cocycle_phase(run: Run, rng: np.random.Generator) -> CheckResult:
    layout = run.layout
    lam = _random_lambda(layout, rng)
    a = _random_lattice_point(run.system, rng).element()
    b = _random_lattice_point(run.system, rng).element()
    outcome = cocycle_phase(layout.group, layout.space, lam, a, b)
    expected = np.exp(2j * np.pi * lam[0] * a.translation[0] * b.modulation[0])
    deviation = max(outcome.defect, abs(outcome.scalar - expected))
    return CheckResult(check="cocycle_phase", lhs=deviation, rhs=0.0, rel_err=deviation,
                       tolerance=1e-10, passed=bool(deviation <= 1e-10))


@capture_check("rep_unitarity")
def check_rep_unitarity(run: Run, rng: np.random.Generator) -> CheckResult:
    layout = run.layout
    lam = _random_lambda(layout, rng)
    g = _random_lattice_point(run.system, rng).element()
    defect = unitarity_defect(rep_matrix(layout.group, layout.space, lam, g))
    return CheckResult(check="rep_unitarity", lhs=defect, rhs=0.0, rel_err=defect,
                       tolerance=1e-12, passed=bool(defect <= 1e-12))


def run_verify(config: RunConfig, threads: int = 1) -> VerifyReport:
    """Run every identity check for the config, in a fixed order"""
    run = prepare_run(config)
    rng = np.random.default_rng(config.seed)
    report = essential_bounds(run.system, config.mode, config.tolerances.rank_rel_tol, threads)

    checks = [
        check_parseval_chain(run, rng),
        check_translate_unitarity(run, rng),
        check_sumid(run, rng),
        check_equality_lemma(run, rng),
        check_trig_parseval(run, rng),
    ]
    checks.extend(_spectral_checks(run, report))
    if run.layout.group.has_group_law:
        checks.append(check_homomorphism(run, rng))
    if run.layout.group.family == "heisenberg3":
        checks.append(check_cocycle_phase(run, rng))
    checks.append(check_rep_unitarity(run, rng))

    return VerifyReport(
        group=run.layout.group.name,
        S=config.S,
        q=config.q,
        seed=config.seed,
        mode=config.mode,
        checks=checks,
        passed=all(c.passed for c in checks),
    )


# --- coeffs ---

def run_coeffs(config: RunConfig, threads: int = 1) -> CoefficientReport:
    """<phi_a, L_(k,m) phi_b> for every generator pair and every lattice point"""
    run = prepare_run(config)
    system = run.system
    jobs = [
        (a, b, k)
        for a in range(len(system.generators))
        for b in range(len(system.generators))
        for k in system.gamma1
    ]

    def coefficients_for(job) -> List[CoefficientEntry]:
        a, b, k = job
        entries = []
        for m in system.central_points:
            value = analysis_coefficient(system.generators[a], system.generators[b], LatticePoint(k=k, m=m))
            entries.append(CoefficientEntry(a=a, b=b, k=list(k), m=list(m), re=value.real, im=value.imag))
        return entries

    batches = map_ordered(coefficients_for, jobs, threads)
    return CoefficientReport(
        group=run.layout.group.name,
        S=config.S,
        q=config.q,
        gamma1_radius=config.gamma1_radius,
        coefficients=[entry for batch in batches for entry in batch],
    )


def coeffs_csv_rows(report: CoefficientReport) -> Tuple[List[str], List[list]]:
    header = ["a", "b", "k", "m", "re", "im"]
    rows = [
        [e.a, e.b, " ".join(map(str, e.k)), " ".join(map(str, e.m)), e.re, e.im]
        for e in report.coefficients
    ]
    return header, rows


# --- demos ---

DEMOS = ("sis_not_left_invariant", "bandlimited_onb")


def _half_shift(ff: FiberField, shift: Tuple[float, ...]) -> FiberField:
    # pi_{sigma+j}(x) on every slot for a translation x that is on the grid but off the lattice
    layout = ff.layout
    n = layout.n_sigma * layout.n_j
    element = GroupElement(x=tuple(shift) + (0.0,) * layout.group.d, z=(0.0,) * layout.r)
    data = rep_apply(layout.group, layout.space, layout.fiber_lambdas.reshape(n, layout.r), element,
                     ff.data.reshape(n, layout.D, layout.D)).reshape(ff.data.shape)
    data[~layout.fiber_mask] = 0
    return FiberField(layout, data)


def _demo_sis(run: Run, threads: int) -> List[CheckResult]:
    if run.layout.group.family != "twostep6":
        raise UnsupportedGroupError(f"sis_not_left_invariant runs on twostep6, config uses {run.layout.group.name}")
    tol = run.config.tolerances.rank_rel_tol
    phi = run.system.generators[0]
    gamma = LatticePoint(k=run.system.gamma1[-1], m=(1,) * run.layout.r)
    lattice = membership_residual(translate(phi, gamma), run.system, tol, threads)
    half = membership_residual(_half_shift(phi, (0.5,) * run.layout.group.d), run.system, tol, threads)

    scale = float(phi.fiber_norms().max())
    threshold = 1e-6 * scale
    print(f"📊 Lattice translate residual: {lattice.max_residual:.3e}", file=sys.stderr)
    print(f"📊 Half-shift residual: {half.max_residual:.3e} (threshold {threshold:.3e})", file=sys.stderr)
    return [
        CheckResult(check="lattice_translate_residual", lhs=lattice.max_residual, rhs=0.0,
                    rel_err=lattice.max_residual, tolerance=1e-9,
                    passed=bool(lattice.max_residual <= 1e-9)),
        CheckResult(check="half_shift_residual", lhs=half.max_residual, rhs=threshold,
                    rel_err=half.max_residual / scale if scale else 0.0, tolerance=1e-6,
                    passed=bool(half.max_residual >= threshold)),
    ]


def _demo_bandlimited(run: Run, threads: int) -> List[CheckResult]:
    if run.layout.group.family != "heisenberg3":
        raise UnsupportedGroupError(f"bandlimited_onb runs on heisenberg3, config uses {run.layout.group.name}")
    system = run.system if run.config.orthonormalize else orthonormalize_fibers(run.system)
    report = essential_bounds(system, "frame", run.config.tolerances.rank_rel_tol, threads)
    gram = translate_gram(system)
    deviation = float(np.abs(gram - np.eye(gram.shape[0])).max())
    norms = system.generators[0].fiber_norms()
    norm_deviation = float(np.abs(norms - 1).max())
    print(f"📊 Translate Gram deviation from identity: {deviation:.3e}", file=sys.stderr)
    return [
        _result("orthonormal_lower", report.lower, 1.0, 1e-9),
        _result("orthonormal_upper", report.upper, 1.0, 1e-9),
        CheckResult(check="translate_gram_identity", lhs=deviation, rhs=0.0, rel_err=deviation,
                    tolerance=1e-8, passed=bool(deviation <= 1e-8)),
        CheckResult(check="unit_fiber_norms", lhs=norm_deviation, rhs=0.0, rel_err=norm_deviation,
                    tolerance=1e-9, passed=bool(norm_deviation <= 1e-9)),
    ]


def run_demo(config: RunConfig, name: str, threads: int = 1) -> DemoReport:
    if name not in DEMOS:
        raise ValueError(f"Unknown demo '{name}'. Available: {', '.join(DEMOS)}")
    run = prepare_run(config)
    checks = _demo_sis(run, threads) if name == "sis_not_left_invariant" else _demo_bandlimited(run, threads)
    return DemoReport(
        demo=name,
        group=run.layout.group.name,
        S=config.S,
        q=config.q,
        checks=checks,
        passed=all(c.passed for c in checks),
    )


# --- field files ---

def export_paths(path: Path, count: int) -> List[Path]:
    """PATH for a single generator, PATH-1, PATH-2, ... (before the suffix) for the rest"""
    path = Path(path)
    return [path if i == 0 else path.with_name(f"{path.stem}-{i}{path.suffix}") for i in range(count)]


def export_generators(config: RunConfig, path: Path) -> List[Path]:
    run = prepare_run(config)
    paths = export_paths(path, len(run.fields))
    for target, field in zip(paths, run.fields):
        size = write_field(target, field)
        print(f"✅ Wrote {target} ({size} bytes)", file=sys.stderr)
    return paths


def import_summary(config: RunConfig, path: Path) -> Dict[str, object]:
    """Read a field file against the config layout and summarize it"""
    layout = make_layout(preset(config.group), config.S, config.q, config.j_half, config.tolerances.pf_eps)
    field = read_field(path, layout)
    summary = {
        "group": layout.group.name,
        "r": layout.r,
        "d": layout.group.d,
        "S": layout.S,
        "q": layout.space.q,
        "j_min": list(layout.fibers.j_min),
        "j_max": list(layout.fibers.j_max),
        "masked_slots": int((~layout.mask).sum()),
        "plancherel_norm": field_norm(field),
    }
    print(f"✅ Imported {path}: {layout.describe()}, Plancherel norm {summary['plancherel_norm']:.6g}", file=sys.stderr)
    return summary
