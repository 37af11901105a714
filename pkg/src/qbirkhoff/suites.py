"""Check batteries behind ``qbirkhoff verify`` and the JSON report format."""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import __version__, convex, factorize, matcore, twirl, werner
from .superop import (
    ad,
    canonical_kraus,
    corner_compress,
    identity,
    jamiolkowski,
    mixture_of_ad,
    schur_multiplier,
    transpose_map,
)

SCHEMA_VERSION = 1
SUITES = ("werner", "twirl", "factorize", "convex", "haar")
MC_TOL = 0.05


@dataclass(frozen=True)
class Check:
    id: str
    description: str
    value: float
    tolerance: float
    comparison: str  # "le": value <= tolerance, "ge": value >= tolerance
    passed: bool

    @classmethod
    def make(cls, id: str, description: str, value, tolerance: float, comparison: str = "le") -> "Check":
        value = float(value)
        if comparison == "le":
            ok = value <= tolerance
        elif comparison == "ge":
            ok = value >= tolerance
        else:
            raise ValueError(f"unknown comparison {comparison!r}")
        return cls(id, description, value, float(tolerance), comparison, bool(ok))


@dataclass(frozen=True)
class ReportDocument:
    suite: str
    checks: tuple[Check, ...]
    seed: int
    tool_version: str = __version__
    elapsed_ms: int = 0
    schema_version: int = SCHEMA_VERSION
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["checks"] = [asdict(c) for c in self.checks]
        doc["passed"] = self.passed
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, doc) -> "ReportDocument":
        """Parse a report; unknown or missing fields are errors."""
        if isinstance(doc, str):
            doc = json.loads(doc)
        top = {"suite", "checks", "seed", "tool_version", "elapsed_ms", "schema_version", "extra", "passed"}
        _exact_keys(doc, top, "report")
        if doc["schema_version"] != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {doc['schema_version']}")
        check_keys = {"id", "description", "value", "tolerance", "comparison", "passed"}
        checks = []
        for c in doc["checks"]:
            _exact_keys(c, check_keys, "check")
            checks.append(Check(**c))
        rep = cls(doc["suite"], tuple(checks), int(doc["seed"]), doc["tool_version"],
                  int(doc["elapsed_ms"]), int(doc["schema_version"]), dict(doc["extra"]))
        if rep.passed != doc["passed"]:
            raise ValueError("overall 'passed' disagrees with the checks")
        return rep


def _exact_keys(doc: dict, allowed: set, what: str) -> None:
    keys = set(doc)
    if keys - allowed:
        raise ValueError(f"unknown {what} fields: {sorted(keys - allowed)}")
    if allowed - keys:
        raise ValueError(f"missing {what} fields: {sorted(allowed - keys)}")


@dataclass
class Settings:
    tol: float = 1e-9
    seed: int = 42
    mc_samples: int = 20000


# -- batteries ---------------------------------------------------------------

def werner_checks(s: Settings) -> list[Check]:
    out = []
    for n in range(2, 8):
        sym = werner.build_symmetry(n)
        pair = werner.werner_holevo(n)
        choi = max(
            np.max(np.abs(jamiolkowski(pair.w_plus) - 2 / (n * (n + 1)) * sym.p_plus)),
            np.max(np.abs(jamiolkowski(pair.w_minus) - 2 / (n * (n - 1)) * sym.p_minus)),
            np.max(np.abs(jamiolkowski(identity(n)) - sym.q)),
        )
        out.append(Check.make(f"choi_n{n}", f"Choi matrices of W_{n}^+-, id_{n} vs p+-, q", choi, 1e-12))
        out.append(Check.make(f"kraus_n{n}", f"W_{n}^+- trace formula vs Kraus sums", pair.kraus_residual, 1e-12))
    for n in (3, 5, 7):
        out.append(Check.make(f"cb_gap_n{n}", f"|2 - ||((W+ - W-) x id)(s_{n})|||", abs(werner.wh_distance_witness(n) - 2), 1e-12))
    rng = np.random.default_rng(s.seed)
    for n in (3, 5, 7):
        _, value = werner.min_symmetric_unitary(n)
        out.append(Check.make(f"minsym_exact_n{n}", f"||(v+v^t)/2||_2^2 - 1/{n} for the witness", abs(value - 1 / n), 1e-12))
        us = matcore.haar_unitaries(n, 1000, rng)
        sym_w = np.sum(np.abs((us + us.transpose(0, 2, 1)) / 2) ** 2, axis=(1, 2)) / n
        out.append(Check.make(f"minsym_haar_n{n}", f"min over 1000 Haar u of ||(u+u^t)/2||_2^2 - 1/{n}",
                              sym_w.min() - 1 / n, -s.tol, "ge"))
        cert = werner.dist_mixed_unitary_wminus(n)
        out.append(Check.make(f"dist_mu_n{n}", f"d_cb(W_{n}^-, conv Aut) vs 2/{n}", abs(cert.distance - 2 / n), 1e-12))
    return out


def _random_ucpt(n: int, terms: int, rng: np.random.Generator):
    c = rng.dirichlet(np.ones(terms))
    return mixture_of_ad(c, list(matcore.haar_unitaries(n, terms, rng)))


def twirl_checks(s: Settings) -> list[Check]:
    out = []
    u = matcore.haar_unitary(3, s.seed)
    for name, t in (("id3", identity(3)), ("t3", transpose_map(3)), ("ad_u", ad(u))):
        est = twirl.twirl_monte_carlo(t, s.mc_samples, s.seed)
        exact, _ = twirl.twirl_closed_form(t)
        err = np.linalg.norm(est.matrix - exact.matrix)
        out.append(Check.make(f"mc_{name}", f"Monte Carlo twirl of {name} vs closed form (Frobenius, N={s.mc_samples})", err, MC_TOL))
    rng = np.random.default_rng(s.seed)
    worst = max(twirl.intertwining_check(_random_ucpt(3, 4, rng)) for _ in range(20))
    out.append(Check.make("intertwining", "max ||J(F(T)) - E(J(T))|| over 20 random UCPT maps, n=3", worst, 1e-12))
    ks = [matcore.haar_unitary(3, s.seed + 1), np.diag([1, 1j, -1])]
    kraus_dev = 0.0
    for a in ks:
        _, c1 = twirl.twirl_closed_form(ad(a))
        c2 = twirl.twirl_coeffs_kraus([a])
        kraus_dev = max(kraus_dev, abs(c1.c_plus - c2.c_plus), abs(c1.c_minus - c2.c_minus))
    out.append(Check.make("kraus_coeffs", "Kraus-formula twirl weights vs Choi-trace weights", kraus_dev, 1e-12))
    dt1 = twirl.double_twirl(factorize.s_minus_2q_witness().u).as_tuple()
    dt2 = twirl.double_twirl(convex.omega_unitary()).as_tuple()
    out.append(Check.make("double_twirl_s2q", "double twirl of s-2q vs (2/27, 0, 0, 25/27)",
                          np.max(np.abs(np.subtract(dt1, (2 / 27, 0, 0, 25 / 27)))), 1e-12))
    out.append(Check.make("double_twirl_omega", "double twirl of v(omega) vs (0, 1/3, 1/3, 1/3)",
                          np.max(np.abs(np.subtract(dt2, (0, 1 / 3, 1 / 3, 1 / 3)))), 1e-12))
    return out


def _schur_kraus_offdiag(rng: np.random.Generator, n: int = 4) -> float:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    b = g @ g.conj().T
    d = 1 / np.sqrt(np.diag(b).real)
    b = d[:, None] * b * d[None, :]
    worst = 0.0
    for k in canonical_kraus(schur_multiplier(b)):
        worst = max(worst, float(np.abs(k - np.diag(np.diag(k))).max(initial=0.0)))
    return worst


def _corner_residual(rng: np.random.Generator, n: int = 3, k: int = 2) -> float:
    def diag_mixture(dim, terms):
        c = rng.dirichlet(np.ones(terms))
        ds = [np.diag(np.exp(2j * np.pi * rng.random(dim))) for _ in range(terms)]
        return c, ds

    ct, dt = diag_mixture(n, 3)
    cs, ds = diag_mixture(k, 2)
    t, s = mixture_of_ad(ct, dt), mixture_of_ad(cs, ds)
    dec = [(a * b, np.kron(x, y)) for a, x in zip(ct, dt) for b, y in zip(cs, ds)]
    result = corner_compress(t, s, dec, alpha=0.0)
    # basis action: columns of the superoperator matrix are T(e_ij)
    return float(np.max(np.abs(result.approximant.matrix - t.matrix)))


def factorize_checks(s: Settings) -> list[Check]:
    out = []
    f5 = factorize.w5_minus_witness()
    out.append(Check.make("w5_minus", "channel_of(Clifford witness) vs W_5^- (max abs)",
                          np.max(np.abs(factorize.channel_of(f5).matrix - werner.werner_minus(5).matrix)), 1e-12))
    fs = factorize.s_minus_2q_witness()
    target = (2 / 27) * werner.werner_plus(3) + (25 / 27) * werner.werner_minus(3)
    out.append(Check.make("s_minus_2q", "channel_of(s-2q) vs (2/27)W+ + (25/27)W- (max abs)",
                          np.max(np.abs(factorize.channel_of(fs).matrix - target.matrix)), 1e-12))
    d = factorize.dist_factorizable_w3minus()
    out.append(Check.make("dist_fm_w3", "d_cb(W_3^-, FM) vs 4/27", abs(d.distance - 4 / 27), 1e-12))
    c7 = factorize.wn_minus_degree4_certificate(7)
    out.append(Check.make("deg4_split_n7", "R = (R+ + R-)/2 for n=7 (max abs)", c7.split_residual, 1e-12))
    out.append(Check.make("deg4_twirl_n7", "twirl weights of the n=7 witnesses vs (0, 1)",
                          max(abs(c7.twirl_coeffs.c_plus), abs(c7.twirl_coeffs.c_minus - 1)), 1e-12))
    for k in (1, 2, 4):
        rep = factorize.antisym_defect_stats(k, 1000, s.seed + k)
        for name in ("op", "12", "42", "2527"):
            out.append(Check.make(f"defect_k{k}_{name}", f"min slack of inequality {name} over 1000 Haar u in U({3 * k})",
                                  getattr(rep, f"min_slack_{name}"), -s.tol, "ge"))
    b = factorize.antisym_defect(fs.u, 3)
    out.append(Check.make("defect_saturation", "||b||_2^2 for s-2q vs 25/27", abs(matcore.norm2_sq(b) - 25 / 27), 1e-12))
    tb = factorize.id_minus_transpose_bound()
    out.append(Check.make("id_minus_t", "id_3 - t_3 CP-splitting identity", tb.residual, 1e-12))
    out.append(Check.make("id_minus_t_bound", "|bound - 10/3|", abs(tb.bound - 10 / 3), 1e-12))
    rng = np.random.default_rng(s.seed)
    out.append(Check.make("schur_kraus_diag", "max off-diagonal entry of Schur Kraus operators, 20 random B (n=4)",
                          max(_schur_kraus_offdiag(rng) for _ in range(20)), 1e-10))
    out.append(Check.make("corner_compress", "||T - T~|| on basis elements, exact diagonal-unitary decomposition",
                          _corner_residual(rng), 1e-9))
    return out


def convex_checks(s: Settings) -> list[Check]:
    out = []
    for key, val in convex.w27_decompositions().items():
        out.append(Check.make(f"w27_{key}", f"identity {key} (max abs, 729x729)", val, 1e-12))
    for key, val in convex.r_channel_residuals().items():
        out.append(Check.make(f"r_{key}", f"{key} symmetrizer / Werner identity (max abs)", val, 1e-12))
    grid = np.linspace(0, 1, 1001)
    sums = max(max(abs(convex.p_coefficients(x).weights.sum() - 1), abs(convex.q_coefficients(x).weights.sum() - 1))
               for x in grid)
    out.append(Check.make("coeff_sums", "max |sum p - 1|, |sum q - 1| on a 1001-point grid", sums, 1e-10))
    rec2 = rec3 = 0.0
    q_fam, r_fam = convex.q_channels(), convex.r_channels()
    for lam in np.linspace(0, 1, 21):
        p = convex.p_coefficients(lam).weights
        q = convex.q_coefficients(lam).weights
        rec2 = max(rec2, np.linalg.norm(sum(w * f.matrix for w, f in zip(p, q_fam)) - convex.tensor_power(lam, 2).matrix))
        rec3 = max(rec3, np.linalg.norm(sum(w * f.matrix for w, f in zip(q, r_fam)) - convex.tensor_power(lam, 3).matrix))
    out.append(Check.make("recon_p", "max ||sum p_i Q_i - T^(x)2|| over 21 lambdas", rec2, 1e-10))
    out.append(Check.make("recon_q", "max ||sum q_i R_i - T^(x)3|| over 21 lambdas", rec3, 1e-9))
    roots = convex.coefficient_roots()
    out.append(Check.make("root_p1", "solved p1 root vs (-3 + sqrt 51)/21",
                          abs(max(convex.real_roots(convex.solved_polynomials(2)[0])) - convex.p1_root()), 1e-9))
    out.append(Check.make("root_p1_printed", "p1 root vs printed 0.19721", abs(convex.p1_root() - 0.19721), 1e-5))
    out.append(Check.make("root_q1", "q1 root vs printed 0.23971", abs(roots["q1"][0] - 0.23971), 1e-4))
    q3_dev = max(abs(a - b) for a, b in zip(roots["q3"], (0.14241, 0.89425, 1.16334))) if len(roots["q3"]) == 3 else np.inf
    out.append(Check.make("roots_q3", "solved q3 roots vs printed (0.14241, 0.89425, 1.16334)", q3_dev, 1e-4))
    cross = convex.printed_polynomial_crosscheck()
    for key in ("p1", "p2", "p3", "q1", "q2", "q4", "q3_corrected"):
        out.append(Check.make(f"printed_{key}", f"printed {key} polynomial vs linear solve", cross[key], 1e-10))
    out.append(Check.make("printed_q3_inconsistent", "printed q3 (-33/20 l^2) deviates from the solve (expected)",
                          cross["q3_printed"], 1e-3, "ge"))
    for power in (2, 3):
        cert = convex.certify_tensor_membership(0.25, power)
        out.append(Check.make(f"certify_025_{power}", f"T_1/4^(x){power} certificate: min weight",
                              cert.min_weight, -1e-10, "ge"))
        out.append(Check.make(f"certify_025_{power}_res", f"T_1/4^(x){power} certificate: reconstruction",
                              cert.reconstruction_residual, 1e-9))
    q14 = convex.q_coefficients(0.25).weights
    out.append(Check.make("q_at_quarter", "q(1/4) vs (0.008663, 0.511953, 0.474826, 0.004557)",
                          np.max(np.abs(q14 - (0.008663, 0.511953, 0.474826, 0.004557))), 1e-6))
    g1, gh = convex.mw_path(Fraction(1)), convex.mw_path(Fraction(1, 2))
    exact = (g1.x, g1.y, gh.x, gh.y) == (Fraction(-23, 27), 1, Fraction(-1, 3), Fraction(-1, 3))
    out.append(Check.make("path_points", "gamma(1) = (-23/27, 1), gamma(1/2) = (-1/3, -1/3) exactly (1 = yes)",
                          float(exact), 1, "ge"))
    lam0 = convex.mw_lambda0()
    out.append(Check.make("lambda0", "|lambda_0 - 0.17507|", abs(round(lam0, 5) - 0.17507), 0.0))
    out.append(Check.make("lambda0_crossing", "lambda_0 closed form vs path/parabola crossing",
                          abs(lam0 - convex.mw_lambda0_intersection()), 1e-9))
    return out


def haar_checks(s: Settings) -> list[Check]:
    res = factorize.haar_average_identity_check(3, s.mc_samples, s.seed)
    return [
        Check.make("haar_ancilla", f"ancilla-average identity, k=3, N={s.mc_samples} (Frobenius)", res.ancilla_average, MC_TOL),
        Check.make("haar_u_ubar", f"int u (x) conj(u) du vs q_3, N={s.mc_samples} (Frobenius)", res.u_ubar, MC_TOL),
    ]


BATTERIES: dict[str, Callable[[Settings], list[Check]]] = {
    "werner": werner_checks,
    "twirl": twirl_checks,
    "factorize": factorize_checks,
    "convex": convex_checks,
    "haar": haar_checks,
}


def run_suite(suite: str, settings: Settings | None = None) -> ReportDocument:
    settings = settings or Settings()
    if suite != "all" and suite not in BATTERIES:
        raise KeyError(suite)
    start = time.perf_counter()
    names = SUITES if suite == "all" else (suite,)
    checks = []
    for name in names:
        checks += BATTERIES[name](settings)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    return ReportDocument(suite, tuple(checks), settings.seed, elapsed_ms=elapsed,
                          extra={"tol": settings.tol, "mc_samples": settings.mc_samples})
