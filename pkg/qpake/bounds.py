"""
Numeric evaluation of the security bounds of the protocol, and parameter planning.
All quantities are in bits. Bounds above 1 are vacuous; reports keep them raw beside the clamped value.
PEP8
"""
import math
from collections import namedtuple
from fractions import Fraction
import numpy
from qpake.utils import verify, numericish, intish, InfeasibleParameters
from qpake.gf2 import TABLE_DECODING_LIMIT

try:
    import pandas as pd
except:
    pd = None

try:
    import scipy.stats as stats
except:
    stats = None

BB84_CBAR = 0.5
PLANNING_GRANULARITY = 64
PLANNING_LIMIT = 2 ** 24
PLANNING_GAMMA = 0.25
PLANNING_BETA = 0.5
WRONG_GUESS_ERROR_RATE = 0.25

def _probability(x, name):
    verify(numericish(x) and 0 <= x <= 1, "%s needs to be in [0, 1]" % name)
    return float(x)

def binary_entropy(mu):
    """
    :param mu: probability in [0, 1]

    :return: -mu log2 mu - (1-mu) log2 (1-mu), with 0 log 0 = 0
    """
    mu = _probability(mu, "mu")
    return sum(-p * math.log2(p) for p in (mu, 1.0 - mu) if p > 0)

h = binary_entropy

def _exp2(x):
    # vacuous bounds can leave the float range; they saturate at inf
    try:
        return 2.0 ** x
    except OverflowError:
        return math.inf

def _checked_rate(tau, eps, strict):
    verify(numericish(tau) and tau >= 0, "tau needs to be non-negative")
    verify(numericish(eps) and eps >= 0, "eps needs to be non-negative")
    rate = float(tau) + float(eps)
    verify(rate < 0.5 if strict else rate <= 0.5,
           "tau + eps needs to be %s 1/2 for the entropy argument" % ("below" if strict else "at most"))
    return rate

def g_eps(n, tau, eps, cbar=BB84_CBAR):
    """
    Smooth min-entropy available for the key after the honest run's leakage:
    (log2(1/cbar) - h(tau + eps) - 1/2) * n
    """
    verify(numericish(n) and n >= 0, "n needs to be non-negative")
    verify(numericish(cbar) and 0 < cbar < 1, "cbar needs to be in (0, 1)")
    rate = _checked_rate(tau, eps, True)
    return (math.log2(1.0 / cbar) - binary_entropy(rate) - 0.5) * n

class BoundsInput(namedtuple("BoundsInput", ["n", "k", "alpha", "tau", "eps", "lam", "gamma", "beta", "delta",
                                             "cbar", "code_failure"])):
    """
    Parameters shared by every bound. Build with bounds_input.
    """
    @property
    def code_delta(self):
        # the syndrome family bias, 2^(-beta n / 4) unless declared
        return self.delta if self.delta is not None else _exp2(-self.beta * self.n / 4.0)

def bounds_input(n, tau, eps=None, lam=16, gamma=0.25, beta=0.5, delta=None, cbar=BB84_CBAR, k=None,
                 alpha=0.25, code_failure=0.0):
    """
    :param n: basis length after both test rounds

    :param tau: error threshold

    :param eps: smoothing parameter, n ** (-1/3) when None

    :param delta: code bias, 2 ** (-beta n / 4) when None

    :param k: qubit count, derived from n and alpha when None

    :param code_failure: decoding failure probability feeding eps_cor

    :return: BoundsInput
    """
    verify(intish(n) and n >= 0, "n needs to be a non-negative integer")
    verify(numericish(alpha) and 0 < alpha < 0.5, "alpha needs to be in (0, 1/2)")
    if k is None:
        k = int(round(n / (1 - 2 * alpha)))
    verify(intish(k) and k >= n, "k needs to be an integer at least n")
    if eps is None:
        verify(n >= 1, "the default eps needs n >= 1")
        eps = n ** (-1.0 / 3)
    _checked_rate(tau, eps, False)
    verify(intish(lam) and lam >= 1, "lambda needs to be a positive integer")
    _probability(gamma, "gamma")
    verify(numericish(beta) and beta > 0, "beta needs to be positive")
    verify(delta is None or (numericish(delta) and 0 <= delta <= 1), "delta needs to be in [0, 1]")
    verify(numericish(cbar) and 0 < cbar < 1, "cbar needs to be in (0, 1)")
    _probability(code_failure, "code_failure")
    return BoundsInput(int(n), int(k), float(alpha), float(tau), float(eps), int(lam), float(gamma), float(beta),
                       None if delta is None else float(delta), float(cbar), float(code_failure))

def pa_bound(hmin, ell_out, eps):
    """
    leftover hash: distance of an ell_out bit hash from uniform, 2 eps + 2^(-(hmin - ell_out)/2)
    """
    return 2 * eps + _exp2(-0.5 * (hmin - ell_out))

def ecc_bound(delta, hmin, block_n):
    """
    syndrome secrecy under a delta-biased family: delta * 2^(-(hmin - block_n)/2)
    """
    return delta * _exp2(-0.5 * (hmin - block_n))

def eps_sec_components(inp):
    """
    :param inp: BoundsInput

    :return: (eps_ec, eps_pa, eps_sec) of the honest run, eps_sec = eps_ec + eps_pa
    """
    verify(isinstance(inp, BoundsInput), "inp needs to be a BoundsInput")
    g = g_eps(inp.n, inp.tau, inp.eps, inp.cbar)
    eps_ec = _exp2(-0.5 * (g + inp.beta * inp.n / 2.0))
    eps_pa = 2 * inp.eps + _exp2(-0.5 * (g - inp.lam))
    return eps_ec, eps_pa, eps_ec + eps_pa

def min_entropy_honest(inp):
    verify(isinstance(inp, BoundsInput), "inp needs to be a BoundsInput")
    q = math.log2(1.0 / inp.cbar) - binary_entropy(_checked_rate(inp.tau, inp.eps, False))
    return inp.n * q - inp.n / 2.0

def max_entropy_bound(inp):
    """
    support size bound on the leaked test information: h(tau + eps) * n
    """
    verify(isinstance(inp, BoundsInput), "inp needs to be a BoundsInput")
    return binary_entropy(_checked_rate(inp.tau, inp.eps, False)) * inp.n

CorruptedBound = namedtuple("CorruptedBound", ["hmin", "eps_pa", "eps_ec", "mu"])

def corrupted_client_mu(inp, party="client"):
    """
    Distance from ideal when one party is corrupted and guessed the wrong password.

    :param inp: BoundsInput

    :param party: "client" (privacy amplification plus syndrome terms) or "server" (privacy
                  amplification only)

    :return: CorruptedBound(hmin, eps_pa, eps_ec, mu)
    """
    verify(isinstance(inp, BoundsInput), "inp needs to be a BoundsInput")
    verify(party in ("client", "server"), "party needs to be client or server")
    two_h = 2 * binary_entropy(_checked_rate(inp.tau, inp.eps, False))
    rate = inp.gamma / 2 - inp.eps - two_h
    hmin = rate * inp.n
    eps_pa = pa_bound(hmin, inp.lam, inp.eps)
    if party == "server":
        return CorruptedBound(hmin, eps_pa, 0.0, eps_pa)
    eps_ec = _exp2(-0.5 * (inp.beta / 2 + rate - 0.5) * inp.n)
    return CorruptedBound(hmin, eps_pa, eps_ec, eps_pa + eps_ec)

GuessConfinement = namedtuple("GuessConfinement", ["leakage", "limit", "confined"])

def wrong_guess_leakage(distance, radius):
    """
    Chance that one wrong password guess leaves the honest server's block within the decoding radius
    of the guesser's block. Each position where the two codewords differ is sifted in with
    probability 1/2 and then carries a wrong bit with probability 1/2.

    :param distance: distance between the guessed and the true codeword

    :param radius: the decoding radius, floor(tau * ell)

    :return: P[Bin(distance, 1/4) <= radius]
    """
    verify(stats, "scipy needs to be installed to evaluate guess leakage")
    verify(intish(distance) and distance >= 0, "distance needs to be a non-negative integer")
    verify(intish(radius) and radius >= 0, "radius needs to be a non-negative integer")
    return float(stats.binom.cdf(radius, distance, WRONG_GUESS_ERROR_RATE))

def guess_confinement(params):
    """
    Whether a corrupted client's online guess is confined to one password: the leakage at the closest
    pair of codewords can't exceed 2^-lambda, and the blocks need the bounded (sparse) decoder.
    Short blocks decode to coset leaders, which reproduce the guesser's block far too often.

    :param params: ProtocolParams

    :return: GuessConfinement(leakage, limit, confined)
    """
    leakage = wrong_guess_leakage(params.dictionary.min_distance, params.family.radius)
    limit = _exp2(-params.lam)
    confined = params.dictionary_size == 1 or (not params.family.table_regime and leakage <= limit)
    return GuessConfinement(leakage, limit, confined)

def verify_guess_confinement(params):
    """
    :return: the GuessConfinement of params. Raises InfeasibleParameters if it isn't confined.
    """
    rtn = guess_confinement(params)
    if not rtn.confined:
        raise InfeasibleParameters("one wrong guess succeeds with probability %.3g above 2^-%s = %.3g%s; "
                                   "raise k or gamma, or lower tau" %
                                   (rtn.leakage, params.lam, rtn.limit,
                                    " (blocks of %s bits decode to coset leaders)" % params.ell
                                    if params.family.table_regime else ""))
    return rtn

def eps_cor(code_failure_prob):
    """
    correctness: the probability of unequal keys when both parties output one is at most the
    decoding failure probability
    """
    return _probability(code_failure_prob, "code_failure_prob")

def uncertainty_bound(hmax, n, cbar=BB84_CBAR):
    """
    lower bound on the smooth min-entropy of one basis given the smooth max-entropy of the
    conjugate one: n log2(1/cbar) - hmax
    """
    verify(numericish(cbar) and 0 < cbar < 1, "cbar needs to be in (0, 1)")
    return n * math.log2(1.0 / cbar) - hmax

def chain_rule_bound(hmin, classical_bits):
    """
    conditioning on a classical register of 2^classical_bits values costs at most classical_bits
    """
    verify(numericish(classical_bits) and classical_bits >= 0, "classical_bits needs to be non-negative")
    return hmin - classical_bits

def bb84_overlap():
    """
    max squared overlap between a computational basis state and a Hadamard basis state
    """
    plus = numpy.eye(2)
    times = numpy.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2)
    return float((numpy.abs(plus @ times.T) ** 2).max())

def _clamp(x):
    return min(1.0, max(0.0, x))

_report_fields = ["h_tau", "g_eps", "eps_cor", "eps_ec", "eps_pa", "eps_sec", "hmin_honest",
                  "hmin_corrupted_client", "mu_corrupted"]
_clamped_fields = ("eps_cor", "eps_ec", "eps_pa", "eps_sec", "mu_corrupted")

class BoundsReport(namedtuple("BoundsReport", _report_fields)):
    """
    Raw values of every bound. The eps fields can exceed 1; clamped() and to_dict() give the
    [0, 1] values beside them.
    """
    def clamped(self):
        return self._replace(**{f: _clamp(getattr(self, f)) for f in _clamped_fields})
    def to_dict(self):
        rtn = self._asdict()
        for f in _clamped_fields:
            rtn[f + "_clamped"] = _clamp(rtn[f])
        return rtn

def bounds_report(inp):
    """
    :param inp: BoundsInput with tau + eps below 1/2

    :return: BoundsReport
    """
    verify(isinstance(inp, BoundsInput), "inp needs to be a BoundsInput")
    eps_ec, eps_pa, eps_sec = eps_sec_components(inp)
    corrupted = corrupted_client_mu(inp)
    return BoundsReport(h_tau=binary_entropy(inp.tau + inp.eps), g_eps=g_eps(inp.n, inp.tau, inp.eps, inp.cbar),
                        eps_cor=eps_cor(inp.code_failure), eps_ec=eps_ec, eps_pa=eps_pa, eps_sec=eps_sec,
                        hmin_honest=min_entropy_honest(inp), hmin_corrupted_client=corrupted.hmin,
                        mu_corrupted=corrupted.mu)

_input_columns = ["n", "tau", "eps", "lam", "gamma", "beta", "cbar"]

def bounds_rows(inputs):
    """
    :return: list of lists, a header row then one row per input (LogFile.log_table format)
    """
    rtn = [_input_columns + _report_fields]
    for inp in inputs:
        report = bounds_report(inp)
        rtn.append([getattr(inp, c) for c in _input_columns] + list(report))
    return rtn

def bounds_table(inputs):
    """
    :param inputs: iterable of BoundsInput

    :return: a pandas DataFrame with one row per input and one column per input field and bound
    """
    verify(pd, "pandas needs to be installed to use bounds_table")
    rows = bounds_rows(inputs)
    return pd.DataFrame(rows[1:], columns=rows[0])

def _planning_input(n, lam, tau):
    return bounds_input(n, tau, n ** (-1.0 / 3), lam=lam, gamma=PLANNING_GAMMA, beta=PLANNING_BETA,
                        cbar=BB84_CBAR, alpha=0.25)

def _meets(n, target, lam, tau):
    if tau + n ** (-1.0 / 3) >= 0.5:
        return False
    return eps_sec_components(_planning_input(n, lam, tau))[2] <= target

def plan_block_length(target_eps_sec, lam, tau):
    """
    smallest n (a multiple of 64, at most 2^24) whose honest eps_sec meets the target with
    cbar = 1/2 and eps = n^(-1/3). Raises InfeasibleParameters if there is none.
    """
    verify(numericish(target_eps_sec) and 0 < target_eps_sec < 1, "target_eps_sec needs to be in (0, 1)")
    verify(intish(lam) and lam >= 1, "lambda needs to be a positive integer")
    verify(numericish(tau) and 0 < tau < 0.5, "tau needs to be in (0, 1/2)")
    lo = max(1, -(-2 * lam // PLANNING_GRANULARITY))
    hi = PLANNING_LIMIT // PLANNING_GRANULARITY
    if not _meets(hi * PLANNING_GRANULARITY, target_eps_sec, lam, tau):
        raise InfeasibleParameters("no n <= 2^24 reaches eps_sec <= %s at lambda = %s, tau = %s" %
                                   (target_eps_sec, lam, tau))
    while lo < hi:
        mid = (lo + hi) // 2
        if _meets(mid * PLANNING_GRANULARITY, target_eps_sec, lam, tau):
            hi = mid
        else:
            lo = mid + 1
    return lo * PLANNING_GRANULARITY

def _confines(n, lam, tau, gamma):
    ell = (n + 1) // 2
    radius = int(math.floor(Fraction(str(tau)) * ell))
    return ell > TABLE_DECODING_LIMIT and \
        wrong_guess_leakage(int(math.ceil(gamma * n - 1e-9)), radius) <= _exp2(-lam)

def guess_block_length(lam, tau, gamma=PLANNING_GAMMA):
    """
    smallest n (a multiple of 64, at most 2^24) whose codes of distance gamma * n confine one wrong
    guess to 2^-lambda. Raises InfeasibleParameters if there is none.
    """
    verify(intish(lam) and lam >= 1, "lambda needs to be a positive integer")
    verify(numericish(tau) and 0 < tau < 0.5, "tau needs to be in (0, 1/2)")
    verify(numericish(gamma) and 0 < gamma <= 1, "gamma needs to be in (0, 1]")
    lo, hi = 1, PLANNING_LIMIT // PLANNING_GRANULARITY
    if not _confines(hi * PLANNING_GRANULARITY, lam, tau, gamma):
        raise InfeasibleParameters("no n <= 2^24 confines a wrong guess at lambda = %s, tau = %s, gamma = %s" %
                                   (lam, tau, gamma))
    while lo < hi:
        mid = (lo + hi) // 2
        if _confines(mid * PLANNING_GRANULARITY, lam, tau, gamma):
            hi = mid
        else:
            lo = mid + 1
    return lo * PLANNING_GRANULARITY

def plan_parameters(target_eps_sec, lam, tau, dictionary_size, setup_seed=0, group_bits=64):
    """
    Suggest a complete parameter set: the larger of the honest-run block length and the one
    confining online guesses.

    :param target_eps_sec: the honest-run security target in (0, 1)

    :param lam: session key bits

    :param tau: error threshold

    :param dictionary_size: number of passwords

    :return: ProtocolParams with alpha = 1/4, k = 2n and the planning gamma and beta
    """
    from qpake.pake import make_params
    n = max(plan_block_length(target_eps_sec, lam, tau), guess_block_length(lam, tau))
    return make_params(lam=lam, k=2 * n, alpha="1/4", tau=str(tau), gamma=PLANNING_GAMMA, beta=PLANNING_BETA,
                       dictionary_size=dictionary_size, setup_seed=setup_seed, group_bits=group_bits)
