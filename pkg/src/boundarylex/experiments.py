"""Experiment drivers: quantitative audits over the built-in presets.

Each audit assembles balls, rays and sequence models, measures the
quantities a bound speaks about, and emits an :class:`ExperimentReport`
whose assertions are marked PASS, WARN or FAIL.  A violated bound whose
measurement carries truncation caveats downgrades to WARN; a violation
in exact mode is a FAIL.  Reports are deterministic functions of the
echoed configuration (timestamps are added only at the CLI edge).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .cayley import CayleyBall, build_ball
from .errors import OutOfRange
from .group_oracle import FreeGroupOracle
from .presets import PresetSpec, get_preset
from .rays import (
    BoundaryBallResult,
    RaySurrogate,
    boundary_ball,
    check_tubular_general,
    make_periodic_ray,
    phi_hat,
    same_boundary_point,
    translate_ray,
)
from .shift_space import (
    INF,
    FinitePartition,
    PeriodicSeq,
    SeqModel,
    TruncatedSeq,
    asdim_cover,
    audit_cover,
    filtration_Rn,
    rho_s,
    shift_closure,
    tail_partition,
)

PASS, WARN, FAIL = "PASS", "WARN", "FAIL"
REPORT_SCHEMA_VERSION = 1


@dataclass
class Assertion:
    name: str
    status: str
    measured: object
    bound: object
    note: str = ""


@dataclass
class ExperimentReport:
    kind: str
    config: dict
    results: dict = field(default_factory=dict)
    assertions: list[Assertion] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.status != FAIL for a in self.assertions)

    def check(self, name: str, measured, bound, ok: bool,
              caveat: bool = False, note: str = "") -> None:
        status = PASS if ok else (WARN if caveat else FAIL)
        self.assertions.append(Assertion(name, status, measured, bound, note))

    def to_json(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "kind": self.kind,
            "config": _jsonable(self.config),
            "results": _jsonable(self.results),
            "assertions": [_jsonable(vars(a)) for a in self.assertions],
            "caveats": list(self.caveats),
            "passed": self.passed,
        }


def _jsonable(value):
    if isinstance(value, Fraction):
        return str(value)
    if value is INF or (isinstance(value, float) and math.isinf(value)):
        return "inf"
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (PeriodicSeq, TruncatedSeq)):
        return str(value)
    if isinstance(value, RaySurrogate):
        return value.to_json()
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


def m5delta_bound(ball: CayleyBall, delta) -> tuple[int, bool]:
    """Size bound for balls of radius 5*delta.

    When floor(5*delta) exceeds the built radius, the full ball size is
    returned instead; that is a certified lower bound for the true
    constant, so bounds stated with it are conservative (flagged).
    """
    r5 = int(5 * Fraction(delta))
    if r5 <= ball.radius:
        return ball.ball_size(r5), False
    return ball.ball_size(ball.radius), True


# -- sigma models -------------------------------------------------------------


def free_sigma_model(alphabet, g: str, seed: str) -> PeriodicSeq:
    """Exact minimal type sequence of g * seed^infinity in a free group.

    In a free group the ray to a boundary point is unique, so sigma is
    the freely reduced infinite word; prepending the letters of g one at
    a time keeps the model exactly reduced.
    """
    model = PeriodicSeq("", seed, alphabet="".join(alphabet.letters))
    for ch in reversed(g):
        head = model.preperiod[0] if model.preperiod else model.period[0]
        if alphabet.inverse(ch) == head:
            model = model.shift()
        else:
            model = PeriodicSeq(ch + model.preperiod, model.period,
                                model.alphabet)
    return model


def periodic_extraction(ball: CayleyBall, g: str, eta: RaySurrogate,
                        M: int, period_len: int) -> Optional[PeriodicSeq]:
    """Two-block periodic extraction of sigma for a translated ray.

    Reads the translated ShortLex words at horizons M, M + p, M + 2p and
    accepts exactly when they form a prefix chain growing by one
    identical block of length p per step.  Needs |g| + M + 2p within the
    ball radius; returns None when the evidence is insufficient.
    """
    p = period_len
    try:
        w1 = translate_ray(ball, g, eta, M).word
        w2 = translate_ray(ball, g, eta, M + p).word
        w3 = translate_ray(ball, g, eta, M + 2 * p).word
    except OutOfRange:
        return None
    if not (w2.startswith(w1) and w3.startswith(w2)):
        return None
    b1, b2 = w2[len(w1):], w3[len(w2):]
    if len(b1) != p or b1 != b2:
        return None
    letters = "".join(ball.oracle.alphabet.letters)
    return PeriodicSeq(w1, b1, alphabet=letters)


@dataclass
class BoundaryMetricSample:
    """A deduplicated boundary ball with sigma data for every point."""

    preset: PresetSpec
    ball: CayleyBall
    eta: RaySurrogate        # the center ray truncated at the identification horizon
    eta_full: RaySurrogate   # the center ray out to the ball radius
    ball_result: BoundaryBallResult
    sigma: list  # SigmaSequence per point
    models: list  # SeqModel per point
    exact_models: bool
    caveats: list[str]

    @property
    def points(self):
        return self.ball_result.points


def build_sample(preset: PresetSpec, ball: CayleyBall, eta_seed: str, r: int,
                 N: Optional[int] = None, M: Optional[int] = None) -> BoundaryMetricSample:
    N = preset.depth_N if N is None else N
    M = preset.horizon_M if M is None else M
    oracle = ball.oracle
    eta_full = make_periodic_ray(oracle, eta_seed, ball.radius, 0)
    eta_at_m = RaySurrogate(eta_full.word[:M], M, ball.radius - M, seed=eta_seed)
    result = boundary_ball(ball, eta_at_m, r, M, preset.delta)

    caveats = list(result.caveats)
    slack = preset.slack
    # the slack-ball scan stays exact (and fast) while M + slack/2 <= radius
    horizon_cap = ball.radius - slack // 2
    sigma = []
    for pt in result.points:
        m_pt = min(pt.surrogate.depth, horizon_cap)
        sigma.append(phi_hat(ball, pt.surrogate, min(N, m_pt), m_pt, slack))

    letters = "".join(oracle.alphabet.letters)
    models: list[SeqModel] = []
    exact = True
    seed_root = _primitive_root(eta_seed)
    for pt, sg in zip(result.points, sigma):
        model: Optional[SeqModel] = None
        if preset.exact_sigma:
            if isinstance(oracle, FreeGroupOracle):
                model = free_sigma_model(oracle.alphabet, pt.witness, seed_root)
            else:
                model = periodic_extraction(ball, pt.witness, eta_at_m, M,
                                            len(seed_root))
        if model is None:
            model = TruncatedSeq(pt.surrogate.word, alphabet=letters)
            exact = False
        models.append(model)
        if preset.exact_sigma and isinstance(model, PeriodicSeq) and slack == 0:
            n = sg.depth
            if model.prefix(n) != sg.letters[:n]:
                raise AssertionError(
                    f"sigma model and phi_hat disagree for witness {pt.witness!r}")
    if not exact:
        caveats.append("truncation-limited sigma models")
    return BoundaryMetricSample(preset, ball, eta_at_m, eta_full, result,
                                sigma, models, exact, caveats)


def _primitive_root(word: str) -> str:
    k = (word + word).find(word, 1)
    return word[:k] if 0 < k < len(word) else word


def schreier_distance(sample: BoundaryMetricSample, i: int, j: int,
                      search_radius: Optional[int] = None) -> Optional[int]:
    """Minimal |g| with g * point_i identified with point_j, or None.

    Exhaustive over the ball of the search radius (default: everything
    the built ball can translate); identification is the finite-depth
    fellow-traveling test, so the value is a desk-scale estimate of the
    Schreier metric.
    """
    if i == j:
        return 0
    ball = sample.ball
    M = sample.ball_result.M
    limit = ball.radius - M
    radius = min(search_radius, limit) if search_radius is not None else limit
    pi, pj = sample.points[i].surrogate, sample.points[j].surrogate
    base = RaySurrogate(pi.word, pi.depth, max(0, ball.radius - pi.depth),
                        seed=None)
    horizon = min(M, pi.depth)
    for v in range(ball.ball_size(radius)):
        g = ball.words[v]
        try:
            moved = translate_ray(ball, g, base, horizon)
        except OutOfRange:
            continue
        if same_boundary_point(ball.oracle, moved, pj, sample.ball_result.delta,
                               horizon) == "same":
            return ball.level[v]
    return None


# -- audits -------------------------------------------------------------------


def _base_config(preset: PresetSpec, **extra) -> dict:
    cfg = {"preset": preset.name, "delta": preset.delta,
           "delta_provenance": preset.delta_provenance,
           "letter_order": "".join(preset.oracle().alphabet.letters)}
    cfg.update(extra)
    return cfg


def _ball_for(preset: PresetSpec, radius: Optional[int] = None) -> CayleyBall:
    return build_ball(preset.oracle(), preset.ball_radius if radius is None
                      else radius)


def audit_lemma_bound(preset_name: str, eta_seed: Optional[str] = None,
                      r: int = 1, N: Optional[int] = None,
                      M: Optional[int] = None,
                      ball: Optional[CayleyBall] = None) -> ExperimentReport:
    """Tail-class count and diameter bounds over one boundary ball.

    Asserts (a) the number of tail classes among the sigma sequences is
    at most M5^2 and (b) every within-class rho_s distance is below
    8*(r + 3*delta + 2); also records, for every point, the minimal
    fellow-traveling offsets against the center ray together with their
    own travel bound.
    """
    preset = get_preset(preset_name)
    eta_seed = eta_seed or preset.default_eta
    ball = ball if ball is not None else _ball_for(preset)
    sample = build_sample(preset, ball, eta_seed, r, N, M)
    delta = preset.delta
    report = ExperimentReport(
        "lemma-bound",
        _base_config(preset, eta=eta_seed, r=r,
                     N=N if N is not None else preset.depth_N,
                     M=sample.ball_result.M, slack=preset.slack,
                     ell_min=preset.ell_min, radius=ball.radius))
    report.caveats.extend(sample.caveats)

    m5, m_truncated = m5delta_bound(ball, delta)
    if m_truncated:
        report.caveats.append("M5 is the full-ball lower bound; the true "
                              "constant is larger, so the class-count "
                              "assertion is conservative")
    partition = tail_partition(sample.models, preset.ell_min)
    n_classes = partition.num_classes
    report.results["points"] = len(sample.points)
    report.results["witnesses"] = [p.witness for p in sample.points]
    report.results["sigma"] = [s.letters for s in sample.sigma]
    report.results["sigma_horizons"] = [s.horizon for s in sample.sigma]
    report.results["models"] = sample.models
    report.results["tail_classes"] = n_classes
    report.results["m5"] = m5
    report.results["m5_truncated"] = m_truncated
    report.check("tail_classes_le_m5_squared", n_classes, m5 ** 2,
                 n_classes <= m5 ** 2, caveat=m_truncated or not sample.exact_models)

    diam_bound = 8 * (r + 3 * delta + 2)
    worst = 0
    inexact = not sample.exact_models
    for members in partition.classes().values():
        for ai in range(len(members)):
            for bi in range(ai + 1, len(members)):
                value, exact = rho_s(sample.models[members[ai]],
                                     sample.models[members[bi]],
                                     preset.ell_min)
                inexact = inexact or not exact
                if value is not INF:
                    worst = max(worst, int(value))
    report.results["max_within_class_rho_s"] = worst
    report.check("within_class_rho_s_le_8(r+3d+2)", worst, diam_bound,
                 Fraction(worst) <= diam_bound, caveat=inexact)

    # fellow-traveling offsets of each translated ray against the center
    t_proof = 2 * (r + 3 * delta + 2)
    report.results["t_proof"] = t_proof
    inv = ball.oracle.alphabet.inverse_word
    pairs = []
    ok_all = True
    for pt in sample.points:
        base2 = ball.oracle.reduce(inv(pt.witness))
        tub = check_tubular_general(ball, "", sample.eta_full, base2,
                                    pt.surrogate, delta,
                                    window=max(1, sample.ball_result.M // 2))
        pairs.append({"witness": pt.witness, "T0": tub.T0, "T1": tub.T1,
                      "ok_travel": tub.ok_travel, "ok_bound": tub.ok_bound,
                      "bound": tub.bound})
        ok_all = ok_all and tub.ok_travel and tub.ok_bound
    report.results["tubular_pairs"] = pairs
    report.check("tubular_offsets_within_2(d+3d+2)", pairs, t_proof, ok_all,
                 caveat=not sample.exact_models)
    return report


def audit_claim(preset_name: str, eta_seed: Optional[str] = None, r: int = 1,
                N: Optional[int] = None, M: Optional[int] = None,
                ball: Optional[CayleyBall] = None) -> ExperimentReport:
    """Schreier distance vs shift distance on every pair in a boundary ball."""
    preset = get_preset(preset_name)
    eta_seed = eta_seed or preset.default_eta
    ball = ball if ball is not None else _ball_for(preset)
    sample = build_sample(preset, ball, eta_seed, r, N, M)
    report = ExperimentReport(
        "claim",
        _base_config(preset, eta=eta_seed, r=r, M=sample.ball_result.M,
                     ell_min=preset.ell_min, radius=ball.radius))
    report.caveats.extend(sample.caveats)

    rows = []
    for i in range(len(sample.points)):
        for j in range(i + 1, len(sample.points)):
            value, exact = rho_s(sample.models[i], sample.models[j],
                                 preset.ell_min)
            exact = exact and sample.exact_models
            if value is INF:
                rows.append({"i": i, "j": j, "rho_s": "inf", "rho": None,
                             "ok": True, "exact": exact})
                continue
            rho = schreier_distance(sample, i, j)
            ok = rho is not None and rho <= value
            rows.append({"i": i, "j": j, "rho_s": int(value), "rho": rho,
                         "ok": ok, "exact": exact})
    report.results["pairs"] = rows
    exact_bad = sum(1 for row in rows if not row["ok"] and row["exact"])
    flagged_bad = sum(1 for row in rows if not row["ok"] and not row["exact"])
    report.results["exact_violations"] = exact_bad
    report.results["flagged_violations"] = flagged_bad
    report.check("rho_le_rho_s", exact_bad + flagged_bad, 0, exact_bad == 0,
                 caveat=flagged_bad > 0 or not sample.exact_models,
                 note="violations in exact mode fail; truncation-limited "
                      "measurements only warn")
    return report


def _random_cyclic_word(rng: random.Random, alphabet, max_len: int = 3) -> str:
    letters = alphabet.letters
    while True:
        n = rng.randint(1, max_len)
        word = []
        for _ in range(n):
            choices = [s for s in letters
                       if not word or s != alphabet.inverse(word[-1])]
            word.append(rng.choice(choices))
        w = "".join(word)
        if len(w) == 1 or w[0] != alphabet.inverse(w[-1]):
            return w


def audit_free_shift(preset_name: str = "f2", count: int = 100,
                     seed: int = 0) -> ExperimentReport:
    """The shift disjunction for free groups, on seeded periodic points.

    For every sampled periodic boundary point and every generator g,
    exactly checks that sigma of the translate equals the shift of
    sigma, or vice versa (both may hold for fixed sequences).
    """
    preset = get_preset(preset_name)
    oracle = preset.oracle()
    if not isinstance(oracle, FreeGroupOracle):
        raise OutOfRange("the shift disjunction audit runs on free presets")
    rng = random.Random(seed)
    alphabet = oracle.alphabet
    report = ExperimentReport(
        "free-shift", _base_config(preset, count=count, seed=seed))
    violations = []
    checked = 0
    for _ in range(count):
        u = _random_cyclic_word(rng, alphabet)
        sigma = PeriodicSeq("", u, alphabet="".join(alphabet.letters))
        for g in alphabet.letters:
            moved = free_sigma_model(alphabet, g, u)
            first = moved.key() == sigma.shift().key()
            second = sigma.key() == moved.shift().key()
            if not (first or second):
                violations.append({"eta": u, "g": g})
            checked += 1
    report.results["checked"] = checked
    report.results["violations"] = violations
    report.check("shift_disjunction", len(violations), 0, not violations)
    return report


def audit_asdim_boundary(preset_name: str, eta_seeds: Optional[Sequence[str]] = None,
                         r: int = 1, ball: Optional[CayleyBall] = None,
                         scale_override: Optional[int] = None) -> ExperimentReport:
    """Bounded cover of the sigma carrier, pulled back to boundary balls.

    Builds the carrier from every sigma model of every boundary ball and
    its shifts, covers it at scale T = 8*(r + 3*delta + 2), measures the
    ball-class constant C of the cover, and asserts that each boundary
    r-ball meets at most C * M5^2 pulled-back classes.
    """
    preset = get_preset(preset_name)
    seeds = list(eta_seeds) if eta_seeds else [preset.default_eta]
    ball = ball if ball is not None else _ball_for(preset)
    delta = preset.delta
    t_frac = 8 * (r + 3 * delta + 2)
    scale = scale_override if scale_override is not None else math.ceil(t_frac)
    report = ExperimentReport(
        "asdim-boundary",
        _base_config(preset, etas=seeds, r=r, scale=scale, radius=ball.radius))

    samples = [build_sample(preset, ball, s, r) for s in seeds]
    for s in samples:
        report.caveats.extend(c for c in s.caveats if c not in report.caveats)

    carrier = shift_closure([m for s in samples for m in s.models])
    cover = asdim_cover(carrier, scale)
    audit = audit_cover(cover, scale, carrier)
    report.results["carrier_size"] = len(carrier)
    report.results["cover_classes"] = audit["classes"]
    report.results["max_class_diameter"] = audit["max_diam"]
    report.results["ball_class_constant"] = audit["max_ball_classes"]
    report.check("cover_diameter_le_8T", audit["max_diam"], 8 * scale,
                 audit["max_diam"] <= 8 * scale)
    c_measured = audit["max_ball_classes"]

    m5, m_truncated = m5delta_bound(ball, delta)
    if m_truncated:
        report.caveats.append("M5 is the full-ball lower bound")
    index = {m.key(): k for k, m in enumerate(carrier)}
    per_ball = []
    ok_all = True
    for seed_word, sample in zip(seeds, samples):
        classes = {cover.class_of[index[m.key()]] for m in sample.models}
        per_ball.append({"eta": seed_word, "classes_met": len(classes)})
        ok_all = ok_all and len(classes) <= c_measured * m5 ** 2
    report.results["per_ball"] = per_ball
    report.results["m5"] = m5
    report.check("boundary_ball_meets_le_C_M5sq_classes",
                 max((b["classes_met"] for b in per_ball), default=0),
                 c_measured * m5 ** 2, ok_all, caveat=m_truncated)
    report.results["class_rho_bound_via_claim"] = _jsonable(
        {"rho_s_diameter_bound": 8 * scale,
         "note": "pulled-back classes are rho-bounded by the same value "
                 "since the Schreier distance never exceeds the shift distance"})
    return report


def audit_hyperfiniteness_witness(preset_name: str,
                                  eta_seed: Optional[str] = None, r: int = 2,
                                  n_list: Sequence[int] = (0, 1, 2, 4, 8),
                                  ball: Optional[CayleyBall] = None) -> ExperimentReport:
    """Finite filtration converging to the tail pullback on a boundary ball."""
    preset = get_preset(preset_name)
    eta_seed = eta_seed or preset.default_eta
    ball = ball if ball is not None else _ball_for(preset)
    sample = build_sample(preset, ball, eta_seed, r)
    report = ExperimentReport(
        "hyperfinite",
        _base_config(preset, eta=eta_seed, r=r, n_list=list(n_list),
                     ell_min=preset.ell_min, radius=ball.radius))
    report.caveats.extend(sample.caveats)

    r0 = tail_partition(sample.models, preset.ell_min)
    m5, m_truncated = m5delta_bound(ball, preset.delta)
    if m_truncated:
        report.caveats.append("M5 is the full-ball lower bound")
    report.results["r0_classes"] = r0.num_classes
    report.results["m5"] = m5
    report.check("ball_meets_le_m5sq_r0_classes", r0.num_classes, m5 ** 2,
                 r0.num_classes <= m5 ** 2,
                 caveat=m_truncated or not sample.exact_models)

    ns = sorted(set(n_list))
    n_star = max((m.states() for m in sample.models), default=0)
    if not ns or ns[-1] < n_star:
        ns.append(n_star)
    parts = [filtration_Rn(sample.models, n, preset.ell_min) for n in ns]
    counts = [p.num_classes for p in parts]
    report.results["filtration_n"] = ns
    report.results["filtration_classes"] = counts
    monotone = all(parts[i].refines(parts[i + 1]) for i in range(len(parts) - 1))
    report.check("filtration_monotone", counts, "non-increasing", monotone)
    converged = parts[-1].same_blocks(r0)
    report.check("filtration_converges_to_r0", counts[-1], r0.num_classes,
                 converged)
    return report


AUDITS = {
    "lemma-bound": audit_lemma_bound,
    "claim": audit_claim,
    "free-shift": audit_free_shift,
    "asdim": audit_asdim_boundary,
    "hyperfinite": audit_hyperfiniteness_witness,
}
