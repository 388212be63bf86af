"""Decision engine: orbit/variety intersections as progressions plus exceptions.

Pipeline for the coordinatewise quadratic action (and for a pair of
coordinates under one map): strip preperiodic coordinates, search for a
prime making every relevant residue cycle indifferent, take the lcm k of
the residue cycle lengths, and for each arithmetic class modulo k combine
an exact scan with Mahler interpolation plus vanishing certificates.  An
identically-vanishing class is reported as a full progression; a class with
a nonzero witness contributes its (finitely many) scanned hits to the
exceptional set.

Outcomes are stamped: Certified(prime, order, precision) when the p-adic
pipeline ran to completion, ScanOnly(limit) for answers backed by the exact
scan and cycle/orbit structure alone, Inconclusive(reason) when bounded
resources could not finish (never a silent wrong answer).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .analytic import IdenticallyZeroAtPrecision, certify_vanishing, orbit_interpolate
from .errors import (
    HypothesisViolated,
    IrrationalCriticalData,
    NotQuasiperiodic,
    PowerMapCase,
    RootNotRational,
)
from .classify import normal_form
from .dynsys import PPoint, RationalMap, TwoExceptional, exceptional_structure, orbit_status, ramification_portrait
from .padics import DEFAULT_PRECISION, primes_upto
from .polynomials import QQ, Polynomial, format_polynomial
from .primesearch import (
    NotFound,
    common_residue_search,
    find_good_prime_multi,
    find_good_prime_quadratic,
    qr_filter_for_minus_one,
)
from .reduction import (
    good_reduction,
    reduce_map,
    reduce_point,
    residue_cycle_multiplier,
    residue_orbit,
)
from .scan import OrbitScanner
from .varieties import AffineVariety, PlaneCurve

__all__ = [
    "Progression",
    "Certified",
    "ScanOnly",
    "Inconclusive",
    "IntersectionDescription",
    "EngineOptions",
    "decide",
    "decide_curve_pair",
    "brute_force_scan",
]

DEFAULT_ORDER = 48
DEFAULT_SCAN_LIMIT = 1000
DEFAULT_CHECK_LIMIT = 64
DEFAULT_PRIME_BOUND = 1000


@dataclass(frozen=True)
class Progression:
    """Indices {n * modulus + offset : n >= start}."""

    modulus: int
    offset: int
    start: int

    def indices_upto(self, bound: int) -> list[int]:
        first = self.start * self.modulus + self.offset
        return list(range(first, bound + 1, self.modulus)) if first <= bound else []

    def contains(self, n: int) -> bool:
        return n % self.modulus == self.offset and n >= self.start * self.modulus + self.offset


@dataclass(frozen=True)
class Certified:
    prime: int
    order: int
    precision: int

    kind = "certified"


@dataclass(frozen=True)
class ScanOnly:
    limit: int

    kind = "scan-only"


@dataclass(frozen=True)
class Inconclusive:
    reason: str

    kind = "inconclusive"


@dataclass(frozen=True)
class IntersectionDescription:
    progressions: tuple[Progression, ...]
    exceptional: tuple[int, ...]
    certification: Certified | ScanOnly | Inconclusive
    witnesses: dict = field(hash=False, default_factory=dict)

    def described_indices(self, bound: int) -> list[int]:
        out = set(self.exceptional)
        out = {n for n in out if n <= bound}
        for prog in self.progressions:
            out.update(prog.indices_upto(bound))
        return sorted(out)

    def is_definitive(self) -> bool:
        return not isinstance(self.certification, Inconclusive)


def _simplify_progressions(progressions, exceptional):
    """Coalesce a full set of classes mod k into one modulus-1 progression."""
    progressions = list(progressions)
    exceptional = set(exceptional)
    if progressions:
        k = progressions[0].modulus
        if len(progressions) == k and {p.offset for p in progressions} == set(range(k)):
            threshold = max(p.start * k + p.offset for p in progressions)
            for p in progressions:
                first = p.start * k + p.offset
                exceptional.update(range(first, threshold, k))
            progressions = [Progression(1, 0, threshold)]
    return tuple(progressions), tuple(sorted(exceptional))


@dataclass(frozen=True)
class EngineOptions:
    prime_bound: int = DEFAULT_PRIME_BOUND
    scan_limit: int = DEFAULT_SCAN_LIMIT
    order: int = DEFAULT_ORDER
    precision: int = DEFAULT_PRECISION
    check_limit: int = DEFAULT_CHECK_LIMIT
    scan_only: bool = False
    residue_search_depth: int = 10


# ---------------------------------------------------------------------------
# input normalization


def _as_variety(variety, g: int) -> AffineVariety:
    if isinstance(variety, AffineVariety):
        return variety
    if isinstance(variety, PlaneCurve):
        return AffineVariety.of([variety.poly], 2)
    if isinstance(variety, Polynomial):
        return AffineVariety.of([variety], g)
    return AffineVariety.of(list(variety), g)


def _quadratic_normal_form(phi: RationalMap) -> tuple[RationalMap, Fraction, Fraction]:
    """Return (t^2 + c model, A, B) with phi = mu o model o mu^(-1), mu(t) = At + B."""
    if not phi.is_polynomial or phi.degree != 2:
        raise HypothesisViolated("the coordinatewise engine handles quadratic polynomials")
    coeffs = phi.affine_coefficients()
    if coeffs[2] == 1 and coeffs[1] == 0:
        return phi, Fraction(1), Fraction(0)
    try:
        record = normal_form(Polynomial.univariate(coeffs, "t"))
    except RootNotRational as exc:  # cannot happen in degree 2; kept for clarity
        raise IrrationalCriticalData(str(exc)) from exc
    model = RationalMap.polynomial(record.normal.univariate_coeffs())
    return model, record.scale, record.shift


def _transform_inputs(maps, alpha, variety):
    """Conjugate every coordinate into the t^2 + c model, moving points and variety."""
    models, scales, shifts = [], [], []
    for phi in maps:
        m, A, B = _quadratic_normal_form(phi)
        models.append(m)
        scales.append(A)
        shifts.append(B)
    new_alpha = []
    for x, A, B in zip(alpha, scales, shifts):
        q = Fraction(x)
        new_alpha.append((q - B) / A)
    names = tuple(f"x{i + 1}" for i in range(len(maps)))
    gens = []
    for gen in variety.generators:
        work = gen.with_variables(names)
        sub = {}
        for i, (A, B) in enumerate(zip(scales, shifts)):
            if A == 1 and B == 0:
                continue
            var = Polynomial.variable(names[i], QQ, names)
            sub[names[i]] = var * A + B
        if sub:
            work = work.substitute(sub)
        gens.append(work)
    return models, new_alpha, AffineVariety(tuple(gens), len(maps))


# ---------------------------------------------------------------------------
# shared class machinery


def _assemble_from_cycles(scanner: OrbitScanner, generators, options: EngineOptions, witnesses: dict):
    """Complete decision when every coordinate is preperiodic (finite orbit)."""
    k = scanner.preperiodic_cycle_lcm
    T = scanner.max_tail
    hits = scanner.scan(generators, options.scan_limit)
    progressions = []
    covered = set()
    for ell in range(k):
        base = T + ((ell - T) % k)
        if scanner.is_hit(generators, base):
            start_index = base
            while start_index - k >= 0 and scanner.is_hit(generators, start_index - k):
                start_index -= k
            progressions.append(Progression(k, ell % k, (start_index - ell % k) // k))
            covered.update(range(start_index, options.scan_limit + 1, k))
    exceptional = tuple(sorted(n for n in hits if n not in covered))
    witnesses["finite-orbit-closure"] = True
    progressions, exceptional = _simplify_progressions(progressions, exceptional)
    return IntersectionDescription(progressions, exceptional, ScanOnly(options.scan_limit), witnesses)


def _certified_classes(
    maps,
    alpha,
    generators,
    scanner: OrbitScanner,
    prime: int,
    options: EngineOptions,
    witnesses: dict,
):
    """Run the per-class certification at a chosen prime; returns a description."""
    g = len(maps)
    stream_coords = [i for i, m in enumerate(scanner.models) if m.kind != "preperiodic"]
    pre_coords = [i for i in range(g) if i not in stream_coords]
    residue_data = {}
    k = scanner.preperiodic_cycle_lcm
    T = scanner.max_tail
    for i in stream_coords:
        phi_v = reduce_map(maps[i], prime)
        r = reduce_point(PPoint.of(alpha[i]), prime)
        orb = residue_orbit(phi_v, r)
        residue_data[i] = orb
        k = k * orb.cycle_length // math.gcd(k, orb.cycle_length)
        T = max(T, orb.tail)
    witnesses["residue-orbits"] = {
        str(i): {"tail": orb.tail, "cycle_length": orb.cycle_length} for i, orb in residue_data.items()
    }
    witnesses["class-modulus"] = k
    hits = scanner.scan(generators, options.scan_limit)
    hit_set = set(hits)
    by_class: dict[int, list[int]] = {}
    for n in hits:
        by_class.setdefault(n % k, []).append(n)
    progressions = []
    exceptional = set()
    degraded = []
    class_reports = {}
    names = tuple(f"x{i + 1}" for i in range(g))
    for ell, class_hits in sorted(by_class.items()):
        base = T + ((ell - T) % k)
        verdicts = []
        try:
            thetas = {}
            for i in stream_coords:
                thetas[i] = orbit_interpolate(
                    maps[i],
                    Fraction(alpha[i]),
                    k,
                    base,
                    prime=prime,
                    order=options.order,
                    precision=options.precision,
                )
            all_zero = True
            for gen in generators:
                sub = gen.with_variables(names)
                assignments = {}
                for i in pre_coords:
                    model = scanner.models[i]
                    rep = model.tail + ((base - model.tail) % model.cycle)
                    pt = model.prefix[rep]
                    if pt.is_infinity:
                        raise NotQuasiperiodic("preperiodic coordinate at infinity")
                    assignments[names[i]] = Polynomial.constant(pt.as_fraction(), QQ, names)
                if assignments:
                    sub = sub.substitute(assignments)
                sub = sub.drop_variables([names[i] for i in pre_coords])
                if sub.is_zero:
                    verdicts.append({"generator": format_polynomial(gen), "verdict": "identically-zero"})
                    continue
                verdict = certify_vanishing(sub, [thetas[i] for i in stream_coords])
                if isinstance(verdict, IdenticallyZeroAtPrecision):
                    verdicts.append({"generator": format_polynomial(gen), "verdict": "identically-zero"})
                else:
                    verdicts.append({"generator": format_polynomial(gen), "verdict": f"nonzero-witness at n={verdict.n}"})
                    all_zero = False
        except NotQuasiperiodic as exc:
            degraded.append(f"class {ell}: {exc}")
            exceptional.update(class_hits)
            class_reports[ell] = {"status": "inconclusive", "reason": str(exc)}
            continue
        if all_zero:
            # certificate claims the whole class from base on; reconcile with the scan
            conflict = any(
                n not in hit_set for n in range(base, options.scan_limit + 1, k)
            )
            if conflict:
                degraded.append(f"class {ell}: certificate contradicts the exact scan")
                exceptional.update(class_hits)
                class_reports[ell] = {"status": "conflict"}
                continue
            # anchor at the certified base, then extend down through the
            # contiguous scanned hits; earlier sporadic hits stay exceptional
            start_index = base
            while start_index - k >= 0 and start_index - k in hit_set:
                start_index -= k
            progressions.append(Progression(k, ell, (start_index - ell) // k))
            exceptional.update(n for n in class_hits if n < start_index)
            class_reports[ell] = {
                "status": "progression",
                "base": base,
                "symbolic": scanner.class_is_structurally_zero(generators, base),
                "checks": verdicts,
            }
        else:
            exceptional.update(class_hits)
            class_reports[ell] = {"status": "exceptional-only", "checks": verdicts}
    witnesses["classes"] = class_reports
    certification: Certified | Inconclusive
    if degraded:
        certification = Inconclusive("; ".join(degraded))
    else:
        certification = Certified(prime, options.order, options.precision)
    progressions, exceptional = _simplify_progressions(progressions, exceptional)
    description = IntersectionDescription(progressions, exceptional, certification, witnesses)
    _soundness_check(description, scanner, generators, options)
    return description


def _soundness_check(description: IntersectionDescription, scanner, generators, options: EngineOptions):
    """Re-verify every reported index up to the check limit by exact evaluation."""
    for n in description.described_indices(options.check_limit):
        if not scanner.is_hit(generators, n):
            raise AssertionError(f"reported index {n} fails exact membership")


# ---------------------------------------------------------------------------
# public entry points


def decide(maps, alpha, variety, options: EngineOptions | None = None) -> IntersectionDescription:
    """Intersection description for coordinatewise quadratic actions over Q.

    `maps` is a single quadratic polynomial map (used diagonally) or one per
    coordinate; `variety` a polynomial, list of polynomials, or AffineVariety
    in x1..xg (x, y accepted for g <= 2).  Power maps (c = 0) belong to the
    multiplicative theory and are rejected with PowerMapCase.
    """
    options = options or EngineOptions()
    if isinstance(maps, RationalMap):
        maps = [maps]
    maps = list(maps)
    alpha = [Fraction(a) for a in alpha]
    if len(maps) == 1 and len(alpha) > 1:
        maps = maps * len(alpha)
    if len(maps) != len(alpha):
        raise ValueError("coordinate count mismatch")
    variety = _as_variety(variety, len(alpha))
    maps, alpha, variety = _transform_inputs(maps, alpha, variety)
    for phi in maps:
        if phi.affine_coefficients()[0] == 0:
            raise PowerMapCase("t -> t^2 is a multiplicative-group endomorphism; out of scope")
    witnesses: dict = {"maps": [repr(m) for m in maps], "alpha": [str(a) for a in alpha]}
    scanner = OrbitScanner(maps, alpha)
    witnesses["orbit-record"] = {
        "preperiodic": list(scanner.record().preperiodic),
        "tails": list(scanner.record().tails),
        "cycles": list(scanner.record().cycles),
    }
    generators = list(variety.generators)
    if options.scan_only:
        hits = scanner.scan(generators, options.scan_limit)
        return IntersectionDescription((), tuple(hits), ScanOnly(options.scan_limit), witnesses)
    if scanner.all_preperiodic:
        return _assemble_from_cycles(scanner, generators, options, witnesses)
    stream_coords = [i for i, m in enumerate(scanner.models) if m.kind != "preperiodic"]
    points = [alpha[i] for i in stream_coords]
    same_map = len({(m.coeffs_f, m.coeffs_g) for m in maps}) == 1
    if same_map:
        c = maps[0].affine_coefficients()[0]
        if c == -1:
            cert = qr_filter_for_minus_one(maps[0], points, options.prime_bound)
        else:
            cert = find_good_prime_quadratic(maps[0], points, options.prime_bound)
    else:
        cert = find_good_prime_multi([maps[i] for i in stream_coords], points, options.prime_bound)
    if isinstance(cert, NotFound):
        hits = scanner.scan(generators, options.scan_limit)
        return IntersectionDescription(
            (),
            tuple(hits),
            Inconclusive(f"no qualifying prime below {cert.p_max}"),
            witnesses,
        )
    witnesses["prime-certificate"] = cert.as_dict()
    return _certified_classes(maps, alpha, generators, scanner, cert.prime, options, witnesses)


def _has_superattracting_cycle_off_exceptional(phi: RationalMap) -> bool:
    from .dynsys import OneExceptional

    structure = exceptional_structure(phi)
    exceptional = set()
    if isinstance(structure, OneExceptional):
        exceptional.add(structure.point)
    elif isinstance(structure, TwoExceptional) and structure.points:
        exceptional.update(structure.points)
    for place, _e in ramification_portrait(phi):
        if isinstance(place, PPoint):
            if place in exceptional:
                continue
            if orbit_status(phi, place).kind == "periodic":
                return True
        else:
            from .intersection import _factor_has_periodic_root

            if _factor_has_periodic_root(phi, place):
                return True
    return False


def decide_curve_pair(phi: RationalMap, alpha, curve, options: EngineOptions | None = None) -> IntersectionDescription:
    """Intersection of a plane curve with the orbit of (x, y) under (phi, phi).

    The prime is sourced from the common-residue search and filtered by the
    attracting-class avoidance check: every periodic residue cycle met by
    either coordinate orbit must have a unit multiplier.
    """
    options = options or EngineOptions()
    if phi.degree < 2:
        raise HypothesisViolated("degree must be at least 2")
    if isinstance(exceptional_structure(phi), TwoExceptional):
        raise PowerMapCase("conjugate to a power map: multiplicative case out of scope")
    if _has_superattracting_cycle_off_exceptional(phi):
        raise HypothesisViolated("superattracting cycle away from the exceptional locus")
    if isinstance(curve, PlaneCurve):
        variety = AffineVariety.of([curve.poly], 2)
    else:
        variety = _as_variety(curve, 2)
    alpha = [Fraction(a) for a in alpha]
    maps = [phi, phi]
    witnesses: dict = {"map": repr(phi), "alpha": [str(a) for a in alpha]}
    scanner = OrbitScanner(maps, alpha)
    generators = list(variety.generators)
    if options.scan_only:
        hits = scanner.scan(generators, options.scan_limit)
        return IntersectionDescription((), tuple(hits), ScanOnly(options.scan_limit), witnesses)
    if scanner.all_preperiodic:
        return _assemble_from_cycles(scanner, generators, options, witnesses)
    stream_coords = [i for i, m in enumerate(scanner.models) if m.kind != "preperiodic"]
    status_both_wander = len(stream_coords) == 2
    prime = None
    tried = []
    if status_both_wander:
        pairs = common_residue_search(phi, alpha[0], alpha[1], options.prime_bound, options.residue_search_depth)
        candidates = sorted({p for p, _n in pairs})
    else:
        candidates = [p for p in primes_upto(options.prime_bound) if p > 2]
    for p in candidates:
        if not good_reduction(phi, p):
            tried.append((p, "bad reduction"))
            continue
        if any(PPoint.of(alpha[i]).b % p == 0 for i in stream_coords):
            tried.append((p, "point not p-integral"))
            continue
        ok = True
        for i in stream_coords:
            phi_v = reduce_map(phi, p)
            orb = residue_orbit(phi_v, reduce_point(PPoint.of(alpha[i]), p))
            lam = residue_cycle_multiplier(phi_v, orb.cycle)
            if lam is None or lam == 0:
                ok = False
                tried.append((p, f"coordinate {i}: residue cycle not indifferent"))
                break
        if ok:
            prime = p
            break
    if prime is None:
        hits = scanner.scan(generators, options.scan_limit)
        witnesses["rejected-primes"] = tried[:40]
        return IntersectionDescription(
            (), tuple(hits), Inconclusive("no qualifying prime from the residue search"), witnesses
        )
    witnesses["prime"] = prime
    return _certified_classes(maps, alpha, generators, scanner, prime, options, witnesses)


def brute_force_scan(maps, alpha, variety, limit: int) -> list[int]:
    """Exact hit indices n <= limit of Phi^n(alpha) against the variety."""
    if isinstance(maps, RationalMap):
        maps = [maps]
    maps = list(maps)
    alpha = [Fraction(a) for a in alpha]
    if len(maps) == 1 and len(alpha) > 1:
        maps = maps * len(alpha)
    variety = _as_variety(variety, len(alpha))
    scanner = OrbitScanner(maps, alpha)
    return scanner.scan(list(variety.generators), limit)
