"""Linear forms in three logarithms and the exponent reduction for Fibonacci.

The checker evaluates the hypotheses of the three-logarithm lower bound
(condition (o), the zero-lemma conditions (i)-(iv) and the structural
requirements) for a parameter block, and reports the windows for the
degenerate case (C3).  The Fibonacci application writes

    Lambda = p log(omega^k / y) - q log(omega) - log(sqrt5),   n = kp - q,

and turns lower bounds for |Lambda| into upper bounds for p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import count

import mpmath
from mpmath import mpf

from .bounds import matveev_lower, modified_height

PREC = 256
ZERO_LEMMA_VARIANTS = ("prop", "theorem", "both")


# ---------------------------------------------------------------------------
# Helper bounds

def g_r(K: int, L: int, R: int, S: int, T: int) -> float:
    """G_R = (N L R / 2)(1/4 - N/(12 R S T)) with N = K^2 L."""
    N = K * K * L
    return N * L * R / 2 * (0.25 - N / (12 * R * S * T))


def theta_lower(K0: int, I: int) -> float:
    """Lower bound for Theta(K0, I), valid for K0 >= 3 and I >= K0(K0+1)/2."""
    if K0 < 3:
        raise ValueError("K0 must be at least 3")
    if 2 * I < K0 * (K0 + 1):
        raise ValueError("I must be at least K0(K0+1)/2")
    K0f, If = Fraction(K0), Fraction(I)
    val = (If * If / (2 * (K0f + 1))) * (1 + (K0f - 1) * (K0f + 1) / If
                                         - K0f * (K0f + 2) * (K0f + 1) ** 2 / (12 * If * If))
    return float(val)


def theta_exact(K0: int, I: int) -> int:
    """Smallest sum of k + m over I distinct points (k, m) with m <= K0 (greedy)."""
    total, taken, n = 0, 0, 0
    while taken < I:
        take = min(min(n, K0) + 1, I - taken)
        total += take * n
        taken += take
        n += 1
    return total


def factorial_bound(K: int) -> float:
    """Lower bound for (4/(K(K-1))) log prod_{k<K} k!."""
    if K < 2:
        raise ValueError("K must be at least 2")
    return (2 * math.log(K) - 3 + 2 * math.log(2 * math.pi * K / math.exp(1.5)) / (K - 1)
            - (2 + 6 / math.pi ** 2 + math.log(K)) / (3 * K * (K - 1)))


def factorial_bound_mp(K: int):
    K = mpf(K)
    return (2 * mpmath.log(K) - 3 + 2 * mpmath.log(2 * mpmath.pi * K / mpmath.exp(mpf(3) / 2)) / (K - 1)
            - (2 + 6 / mpmath.pi ** 2 + mpmath.log(K)) / (3 * K * (K - 1)))


def log_factorial_product(K: int) -> float:
    """Exact (4/(K(K-1))) log prod_{k=1}^{K-1} k!, from big integers."""
    prod, f = 1, 1
    for k in range(1, K):
        f *= k
        prod *= f
    with mpmath.workprec(PREC):
        return float(4 * mpmath.log(prod) / (K * (K - 1)))


# ---------------------------------------------------------------------------
# Parameter blocks

@dataclass(frozen=True)
class ThreeLogParams:
    K: int
    L: int
    R1: int
    R2: int
    S1: int
    S2: int
    T1: int
    T2: int
    rho: mpmath.mpf
    D: int
    a1: mpmath.mpf
    a2: mpmath.mpf
    a3: mpmath.mpf
    b1: int
    b2: int
    b3: int
    R: int = 0
    S: int = 0
    T: int = 0
    m: mpmath.mpf | None = None

    def __post_init__(self):
        for name, a, b in (("R", self.R1, self.R2), ("S", self.S1, self.S2), ("T", self.T1, self.T2)):
            if getattr(self, name) == 0:
                object.__setattr__(self, name, a + b + 1)

    @property
    def N(self) -> int:
        return self.K * self.K * self.L

    @property
    def g(self):
        return mpf(1) / 4 - mpf(self.N) / (12 * mpf(self.R) * self.S * self.T)

    @property
    def eta0(self):
        return mpf(self.R - 1) / 2 + mpf(self.b1) / self.b2 * mpf(self.S - 1) / 2

    @property
    def zeta0(self):
        return mpf(self.T - 1) / 2 + mpf(self.b3) / self.b2 * mpf(self.S - 1) / 2

    @property
    def log_b(self):
        """Upper bound for log b using the factorial-product lower bound."""
        return (mpmath.log(self.b2 * self.eta0) + mpmath.log(self.b2 * self.zeta0)
                - factorial_bound_mp(self.K))

    def structural(self) -> dict[str, bool]:
        ints = (self.K, self.L, self.R, self.R1, self.R2, self.S, self.S1, self.S2,
                self.T, self.T1, self.T2)
        return {
            "all_ge_3": all(x >= 3 for x in ints),
            "K_ge_2L": self.K >= 2 * self.L,
            "L_ge_5": self.L >= 5,
            "R_gt_R1_R2": self.R > self.R1 + self.R2,
            "S_gt_S1_S2": self.S > self.S1 + self.S2,
            "T_gt_T1_T2": self.T > self.T1 + self.T2,
            "T1_ge_R1": self.T1 >= self.R1,
            "rho_gt_1": self.rho > 1,
            "g_positive": self.g > 0,
        }

    def with_b(self, b1: int, b2: int, b3: int) -> "ThreeLogParams":
        return replace(self, b1=b1, b2=b2, b3=b3)

    def to_json(self) -> dict:
        d = {k: getattr(self, k) for k in ("K", "L", "R", "R1", "R2", "S", "S1", "S2",
                                           "T", "T1", "T2", "D", "b1", "b2", "b3")}
        for k in ("rho", "a1", "a2", "a3"):
            d[k] = mpmath.nstr(getattr(self, k), 30)
        if self.m is not None:
            d["m"] = mpmath.nstr(self.m, 30)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ThreeLogParams":
        with mpmath.workprec(PREC):
            return cls(int(d["K"]), int(d["L"]), int(d["R1"]), int(d["R2"]), int(d["S1"]),
                       int(d["S2"]), int(d["T1"]), int(d["T2"]), mpf(str(d["rho"])), int(d["D"]),
                       mpf(str(d["a1"])), mpf(str(d["a2"])), mpf(str(d["a3"])),
                       int(d["b1"]), int(d["b2"]), int(d["b3"]),
                       int(d.get("R", 0)), int(d.get("S", 0)), int(d.get("T", 0)),
                       mpf(str(d["m"])) if "m" in d else None)


def param_recipe(L: int, m, rho, a1, a2, a3, D: int = 2,
                 b: tuple[int, int, int] = (1, 1, 1)) -> ThreeLogParams:
    """Parameters from L, m, rho and the a_i:

    K = floor(m L a1 a2 a3), R1 = floor(c1 L^(2/3) a2 a3), ..., R2 = floor(c2 L a2 a3), ...
    with c1 = (32.001 m^2)^(1/3) and c2 = (12 m^2)^(1/3).
    """
    if L < 100:
        raise ValueError("L must be at least 100")
    with mpmath.workprec(PREC):
        m, rho = mpf(m), mpf(rho)
        a1, a2, a3 = mpf(a1), mpf(a2), mpf(a3)
        if not 10 < m < 50:
            raise ValueError("m must lie in (10, 50)")
        if rho <= mpmath.e:
            raise ValueError("rho must exceed e")
        if a3 > a1:
            raise ValueError("need a3 <= a1")
        c1 = (mpf("32.001") * m * m) ** (mpf(1) / 3)
        c2 = (12 * m * m) ** (mpf(1) / 3)
        l23 = mpf(L) ** (mpf(2) / 3)
        fl = lambda x: int(mpmath.floor(x))
        return ThreeLogParams(
            K=fl(m * L * a1 * a2 * a3), L=L,
            R1=fl(c1 * l23 * a2 * a3), R2=fl(c2 * L * a2 * a3),
            S1=fl(c1 * l23 * a1 * a3), S2=fl(c2 * L * a1 * a3),
            T1=fl(c1 * l23 * a1 * a2), T2=fl(c2 * L * a1 * a2),
            rho=rho, D=D, a1=a1, a2=a2, a3=a3, b1=b[0], b2=b[1], b3=b[2], m=m)


# ---------------------------------------------------------------------------
# Verdicts

@dataclass
class MauriceVerdict:
    conditions: dict[str, bool]
    structural: dict[str, bool]
    o_lhs: mpmath.mpf
    o_rhs: mpmath.mpf
    lambda_prime_log_bound: mpmath.mpf | None
    degenerate_cases: dict = field(default_factory=dict)
    assumptions: tuple[str, ...] = ("alpha_1, alpha_2, alpha_3 multiplicatively independent",)

    @property
    def passed(self) -> bool:
        return all(self.conditions.values()) and all(self.structural.values())


def c3_windows(p: ThreeLogParams) -> dict:
    """Bounds on r', s', t', t'' in the degenerate case (C3).

    X_r = sqrt((R1+1)(S1+1)/(T1+1)) bounds |r'| and |s'|, X_t =
    sqrt((S1+1)(T1+1)/(R1+1)) bounds |t'| - 1 and X_t2 = sqrt((R1+1)(T1+1)/(S1+1))
    bounds |t''|.  Integer windows: r_max = ceil(X_r) and t_max = floor(1 + X_t).
    """
    r1, s1, t1 = mpf(p.R1 + 1), mpf(p.S1 + 1), mpf(p.T1 + 1)
    x_r = mpmath.sqrt(r1 * s1 / t1)
    x_t = mpmath.sqrt(s1 * t1 / r1)
    x_t2 = mpmath.sqrt(r1 * t1 / s1)
    return {
        "x_r": x_r, "x_t": x_t, "x_t2": x_t2,
        "r_max": int(mpmath.ceil(min(x_r, r1))),
        "s_max": int(mpmath.ceil(min(x_r, s1))),
        "t_max": int(mpmath.floor(1 + x_t)),
        "t2_max": int(mpmath.floor(1 + x_t)),
        "d3_max": int(mpmath.floor(r1 * s1 / t1)),
    }


def zero_lemma_conditions(p: ThreeLogParams, variant: str = "prop") -> dict[str, bool]:
    """Conditions (i)-(iv).

    Two readings of the conditions are supported.  "prop" uses (R2+1)(S2+1)(T2+1)
    in (iii) and no factor 4 in (iv).  "theorem" uses (R1+1)(S1+1)(T1+1) in (iii)
    and a factor 4 in (iv).  "both" requires the two readings at once.
    """
    if variant not in ZERO_LEMMA_VARIANTS:
        raise ValueError(f"variant must be one of {ZERO_LEMMA_VARIANTS}")
    R1, S1, T1 = p.R1 + 1, p.S1 + 1, p.T1 + 1
    R2, S2, T2 = p.R2 + 1, p.S2 + 1, p.T2 + 1
    K, L = p.K, p.L
    iii_prop = R2 * S2 * T2 >= 12 * (K - 1) ** 2 * (L - 1)
    iii_thm = R1 * S1 * T1 >= 12 * (K - 1) ** 2 * (L - 1)
    iv_prop = R1 * S1 * T1 >= 8 * (2 * K + L - 2) ** 2
    iv_thm = 4 * R1 * S1 * T1 >= 8 * (2 * K + L - 2) ** 2
    pick = {"prop": (iii_prop, iv_prop), "theorem": (iii_thm, iv_thm),
            "both": (iii_prop and iii_thm, iv_prop and iv_thm)}[variant]
    return {"i": 4 * R1 * S1 >= T1, "ii": 4 * R1 * T1 >= S1, "iii": pick[0], "iv": pick[1]}


def condition_o(p: ThreeLogParams) -> tuple:
    with mpmath.workprec(PREC):
        K, L, rho = mpf(p.K), mpf(p.L), mpf(p.rho)
        lhs = (K * L / 2 + L / 4 - 1 - 2 * K / (3 * L)) * mpmath.log(rho)
        rhs = ((p.D + 1) * mpmath.log(mpf(p.N)) + p.g * L * (p.a1 * p.R + p.a2 * p.S + p.a3 * p.T)
               + p.D * (K - 1) * p.log_b - 2 * mpmath.log(mpmath.e / 2))
        return lhs >= rhs, lhs, rhs


def maurice_check(p: ThreeLogParams, variant: str = "prop") -> MauriceVerdict:
    """Evaluate all hypotheses; on success log Lambda' > -KL log rho."""
    ok_o, lhs, rhs = condition_o(p)
    conds = {"o": bool(ok_o)}
    conds.update(zero_lemma_conditions(p, variant))
    struct = p.structural()
    verdict = MauriceVerdict(conds, struct, lhs, rhs, None, c3_windows(p))
    if verdict.passed:
        with mpmath.workprec(PREC):
            verdict.lambda_prime_log_bound = -mpf(p.K) * p.L * mpmath.log(p.rho)
    return verdict


# ---------------------------------------------------------------------------
# Two logarithms

@dataclass(frozen=True)
class TwoLogInput:
    D: int
    log_A1: mpmath.mpf
    log_A2: mpmath.mpf
    b1: mpmath.mpf
    b2: mpmath.mpf

    def __post_init__(self):
        if self.log_A1 < mpf(1) / self.D or self.log_A2 < mpf(1) / self.D:
            raise ValueError("log A_i must be at least 1/D")

    @property
    def b_prime(self):
        return mpf(self.b1) / (self.D * self.log_A2) + mpf(self.b2) / (self.D * self.log_A1)


def two_log_lower(inp: TwoLogInput, b_prime=None) -> mpmath.mpf:
    """-25.55 D^4 (max{log b' + 0.19, 18/D, 1})^2 log A1 log A2."""
    with mpmath.workprec(PREC):
        bp = inp.b_prime if b_prime is None else mpf(b_prime)
        D = mpf(inp.D)
        x = max(mpmath.log(bp) + mpf("0.19"), 18 / D, mpf(1))
        return -mpf("25.55") * D ** 4 * x * x * inp.log_A1 * inp.log_A2


# ---------------------------------------------------------------------------
# Fibonacci application

def _h_omega():
    return mpmath.log((1 + mpmath.sqrt(5)) / 2) / 2


def _h_sqrt5():
    return mpmath.log(5) / 2


LOG_Y_DEFAULT = mpf(10) ** 20


def fib_a_values(rho, p, log_y=LOG_Y_DEFAULT):
    """a-values attached to sqrt5, omega^k/y and omega.

    a1 = (rho + 3) log sqrt5, a2 = (rho + 2p) log omega + 4 log y,
    a3 = (rho + 1) log omega.  Here alpha_1 = sqrt5 and alpha_3 = omega so that
    a3 <= a1 and each a_i dominates rho |log alpha_i| - log alpha_i + 2D h(alpha_i).
    """
    with mpmath.workprec(PREC):
        rho, p, log_y = mpf(rho), mpf(p), mpf(log_y)
        lw = mpmath.log((1 + mpmath.sqrt(5)) / 2)
        return ((rho + 3) * mpmath.log(mpmath.sqrt(5)),
                (rho + 2 * p) * lw + 4 * log_y,
                (rho + 1) * lw)


def a_lower_bound(rho, log_alpha, h, D: int = 2):
    return mpf(rho) * abs(mpf(log_alpha)) - mpf(log_alpha) + 2 * D * mpf(h)


def fib_a_values_valid(rho, p, log_y=LOG_Y_DEFAULT) -> bool:
    """Check the a_i lower bounds (D = 2).

    For sqrt5 and omega the bounds hold with equality.  For omega^k/y use
    |log(omega^k/y)| <= log omega + 1 and h(omega^k/y) <= log y + (log omega)/2.
    """
    with mpmath.workprec(PREC):
        a1, a2, a3 = fib_a_values(rho, p, log_y)
        lw = mpmath.log((1 + mpmath.sqrt(5)) / 2)
        eps = mpf(2) ** (-PREC + 32) * (1 + a2)
        need1 = a_lower_bound(rho, mpmath.log(mpmath.sqrt(5)), _h_sqrt5())
        need3 = a_lower_bound(rho, lw, _h_omega())
        need2 = (mpf(rho) + 1) * (lw + 1) + 4 * (mpf(log_y) + lw / 2)
        return bool(a1 + eps >= need1 and a3 + eps >= need3 and a2 + eps >= need2)


def fib_params(L: int, m, rho, p, log_y=LOG_Y_DEFAULT) -> ThreeLogParams:
    """Recipe parameters for exponent bound p, with the worst-case b's (b2 = p, b3 = p - 1)."""
    a1, a2, a3 = fib_a_values(rho, p, log_y)
    p = int(p)
    return param_recipe(L, m, rho, a1, a2, a3, D=2, b=(1, p, max(p - 1, 1)))


def _largest_p(pred, lo, hi):
    """Largest real p in [lo, hi] with pred(p) True, assuming pred is monotone decreasing."""
    with mpmath.workprec(PREC):
        lo, hi = mpf(lo), mpf(hi)
        if not pred(lo):
            return lo
        while pred(hi):
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if pred(mid):
                lo = mid
            else:
                hi = mid
            if hi - lo < mpf("1e-6") * hi:
                break
        return hi


def lambda_upper_log(p, log_y=LOG_Y_DEFAULT):
    """log|Lambda| < -2 p log y + 1."""
    return -2 * mpf(p) * mpf(log_y) + 1


def matveev_first_bound(log_y=LOG_Y_DEFAULT):
    """Unconditional exponent bound from Matveev's theorem (real case, three logs)."""
    with mpmath.workprec(PREC):
        lw = mpmath.log((1 + mpmath.sqrt(5)) / 2)
        A_omega = modified_height(2, _h_omega(), lw)
        A_sqrt5 = modified_height(2, _h_sqrt5(), mpmath.log(5) / 2)
        # h(omega^k / y) <= log y + (log omega)/2 and |log(omega^k/y)| is tiny
        A_2 = 2 * mpf(log_y) + lw

        def compatible(p):
            lower = matveev_lower(2, (A_omega, A_2, A_sqrt5), p)
            return lambda_upper_log(p, log_y) > lower

        return _largest_p(compatible, 10, 10 ** 12)


def main_case_bound(L: int, m, rho, p_hint, log_y=LOG_Y_DEFAULT):
    """Largest p with -2p log y + 1 >= -KL log rho - log(KL), parameters re-derived per p."""
    with mpmath.workprec(PREC):
        def compatible(p):
            prm = fib_params(L, m, rho, p, log_y)
            kl = mpf(prm.K) * prm.L
            lower = -kl * mpmath.log(prm.rho) - mpmath.log(kl)
            return lambda_upper_log(p, log_y) > lower

        return _largest_p(compatible, 10, mpf(p_hint))


def c3_log_A2(windows: dict):
    """log A2 = t_max h(sqrt5) + r_max h(omega) + 1."""
    with mpmath.workprec(PREC):
        return windows["t_max"] * _h_sqrt5() + windows["r_max"] * _h_omega() + 1


def c3_bound(windows: dict, log_y=LOG_Y_DEFAULT):
    """Exponent bound in the degenerate case via two logarithms."""
    with mpmath.workprec(PREC):
        log_A2 = c3_log_A2(windows)
        lw = mpmath.log((1 + mpmath.sqrt(5)) / 2)
        h_alpha2 = mpf(log_y) + lw / 2
        log_A1 = mpf("1.001") * h_alpha2
        if log_A1 < h_alpha2 + windows["t_max"] * _h_sqrt5() + 1:
            log_A1 = h_alpha2 + windows["t_max"] * _h_sqrt5() + 1

        def compatible(p):
            inp = TwoLogInput(2, log_A1, log_A2, mpf(p), mpf(p))
            return lambda_upper_log(p, log_y) > two_log_lower(inp)

        return _largest_p(compatible, 10, 10 ** 9), log_A2


@dataclass
class ReductionStep:
    p_in: mpmath.mpf
    L: int
    m: mpmath.mpf
    rho: mpmath.mpf
    verdict: MauriceVerdict
    p_main: mpmath.mpf
    p_c12: int
    p_c3: mpmath.mpf
    log_A2: mpmath.mpf
    params: ThreeLogParams

    @property
    def p_out(self):
        return max(self.p_main, mpf(self.p_c12), self.p_c3)

    def summary(self) -> dict:
        w = self.verdict.degenerate_cases
        return {"p_in": float(self.p_in), "L": self.L, "m": float(self.m), "rho": float(self.rho),
                "conditions_pass": self.verdict.passed, "p_main": float(self.p_main),
                "S1": self.params.S1, "S2": self.params.S2, "p_c3": float(self.p_c3),
                "r_max": w["r_max"], "t_max": w["t_max"], "log_A2": float(self.log_A2),
                "p_out": float(self.p_out)}


def reduction_step(p_in, L: int, m, rho, log_y=LOG_Y_DEFAULT, variant: str = "prop") -> ReductionStep:
    """One pass: hypotheses checked at the worst case p = p_in, then the three bounds."""
    with mpmath.workprec(PREC):
        p_in = mpf(p_in)
        prm = fib_params(L, m, rho, int(mpmath.ceil(p_in)), log_y)
        verdict = maurice_check(prm, variant)
        if not fib_a_values_valid(rho, p_in, log_y):
            verdict.conditions["a_values"] = False
        p_main = main_case_bound(L, m, rho, p_in, log_y)
        p_c3, log_A2 = c3_bound(verdict.degenerate_cases, log_y)
        return ReductionStep(p_in, L, mpf(m), mpf(rho), verdict, p_main,
                             max(prm.S1, prm.S2), p_c3, log_A2, prm)


# fast float screen used to search for good (L, rho, m)

def _screen(p_in: float, L: int, m: float, rho: float, log_y: float = 1e20):
    lw = math.log((1 + math.sqrt(5)) / 2)
    a1 = (rho + 3) * math.log(math.sqrt(5))
    a2 = (rho + 2 * p_in) * lw + 4 * log_y
    a3 = (rho + 1) * lw
    c1 = (32.001 * m * m) ** (1 / 3)
    c2 = (12 * m * m) ** (1 / 3)
    l23 = L ** (2 / 3)
    K = m * L * a1 * a2 * a3
    R1, S1, T1 = c1 * l23 * a2 * a3, c1 * l23 * a1 * a3, c1 * l23 * a1 * a2
    R2, S2, T2 = c2 * L * a2 * a3, c2 * L * a1 * a3, c2 * L * a1 * a2
    R, S, T = R1 + R2 + 1, S1 + S2 + 1, T1 + T2 + 1
    logN = 2 * math.log(K) + math.log(L)
    g = 0.25 - (K / R) * (K / S) * L / (12 * T)
    eta = (R - 1) / 2 + (S - 1) / (2 * p_in)
    zeta = (T - 1) / 2 + (S - 1) / 2
    log_b = math.log(p_in * eta) + math.log(p_in * zeta) - factorial_bound(K)
    lhs = (K * L / 2 + L / 4 - 1 - 2 * K / (3 * L)) * math.log(rho)
    rhs = 3 * logN + g * L * (a1 * R + a2 * S + a3 * T) + 2 * (K - 1) * log_b - 2 * math.log(math.e / 2)
    p_main = 2 * m * L * L * a1 * a3 * math.log(rho) * (a2 / (4 * log_y))
    return lhs - rhs, p_main, max(S1, S2)


def optimise_parameters(p_in, L_range=(100, 600), rho_grid=None, margin: float = 1e-6):
    """Grid search for (L, rho, m) minimising the main-case bound subject to (o)."""
    p_in = float(p_in)
    if rho_grid is None:
        rho_grid = [3 + 0.25 * i for i in range(69)]
    best = None
    for L in range(L_range[0], L_range[1] + 1, 2):
        for rho in rho_grid:
            lo, hi = 10.0001, 49.9999
            ok = lambda mm: _screen(p_in, L, mm, rho)[0] > margin * abs(_screen(p_in, L, mm, rho)[1])
            if not ok(hi):
                continue
            for _ in range(40):
                mid = (lo + hi) / 2
                if ok(mid):
                    hi = mid
                else:
                    lo = mid
            pm = _screen(p_in, L, hi, rho)[1]
            if best is None or pm < best[0]:
                best = (pm, L, hi, rho)
    if best is None:
        raise ValueError("no admissible parameters found")
    return best[1], best[2], best[3]


FIRST_PASS = {"L": 260, "m": mpf("26.12446"), "rho": mpf(10)}


@dataclass
class ReductionTrace:
    p_matveev: mpmath.mpf
    steps: list[ReductionStep]
    converged: bool

    @property
    def final_bound(self):
        return self.steps[-1].p_out if self.steps else self.p_matveev


def fib_p_reduction(first=None, log_y=LOG_Y_DEFAULT, max_iter: int = 12, tol: float = 0.01,
                    variant: str = "prop") -> ReductionTrace:
    """Matveev bound, then repeated passes of the three-logarithm bound.

    The first pass uses the parameters in ``first`` (L, m, rho); later passes
    re-optimise them for the current bound.  Stops once consecutive bounds
    differ by less than ``tol``.
    """
    first = dict(FIRST_PASS if first is None else first)
    with mpmath.workprec(PREC):
        p0 = matveev_first_bound(log_y)
        steps = []
        p_cur = p0
        L, m, rho = first["L"], mpf(first["m"]), mpf(first["rho"])
        converged = False
        for i in count():
            if i >= max_iter:
                break
            if i > 0:
                L, mm, rr = optimise_parameters(p_cur)
                m, rho = mpf(mm), mpf(rr)
            step = reduction_step(p_cur, L, m, rho, log_y, variant)
            if not step.verdict.passed:
                raise ArithmeticError(f"pass {i + 1}: hypotheses fail: {step.verdict.conditions}")
            steps.append(step)
            p_new = step.p_out
            if p_new >= p_cur * (1 - tol):
                converged = True
                break
            p_cur = p_new
        return ReductionTrace(p0, steps, converged)
