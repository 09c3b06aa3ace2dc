import math
import unittest
import numpy
import scipy.special as special
import qpake.bounds as bounds
from qpake.bounds import bounds_input, binary_entropy, g_eps
from qpake.utils import InfeasibleParameters
from qpake.pake import make_params
from qpake.testing.qpaketestutils import firesException, tiny_params, medium_params, guess_params

try:
    import pandas as pd
except:
    pd = None

def _nearly(x, y, tol=1e-9):
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))

class TestEntropy(unittest.TestCase):
    def testBinaryEntropy(self):
        self.assertTrue(_nearly(binary_entropy(0.25), 0.8112781244591328))
        self.assertTrue(binary_entropy(0) == binary_entropy(1) == 0 and binary_entropy(0.5) == 1)
        for p in numpy.linspace(0.001, 0.999, 57):
            reference = (special.entr(p) + special.entr(1 - p)) / math.log(2)
            self.assertTrue(_nearly(binary_entropy(p), reference))
            self.assertTrue(_nearly(binary_entropy(p), binary_entropy(1 - p)))
        self.assertTrue(bounds.h is binary_entropy)
        self.assertTrue(firesException(lambda: binary_entropy(1.5)))

    def testGEps(self):
        self.assertTrue(abs(g_eps(1000, 0.05, 0.01) - 172.555) < 0.01)
        self.assertTrue(g_eps(0, 0.05, 0.01) == 0)
        self.assertTrue(_nearly(g_eps(100, 0, 0), 50))
        self.assertTrue(g_eps(1000, 0.2, 0.01) < 0)
        self.assertTrue(firesException(lambda: g_eps(1000, 0.45, 0.05)))
        self.assertTrue(firesException(lambda: g_eps(1000, 0.1, 0.01, cbar=1)))

class TestHonestBounds(unittest.TestCase):
    def testComponents(self):
        inp = bounds_input(1000, 0.05, 0.01, lam=16, beta=0.5)
        ec, pa, sec = bounds.eps_sec_components(inp)
        g = g_eps(1000, 0.05, 0.01)
        self.assertTrue(_nearly(ec, 2 ** (-0.5 * (g + 0.5 * 1000 / 2))))
        self.assertTrue(_nearly(pa, 0.02 + 2 ** (-0.5 * (g - 16))))
        self.assertTrue(_nearly(sec, ec + pa))
        self.assertTrue(_nearly(bounds.min_entropy_honest(inp), g))

    def testPrivacyAmplification(self):
        self.assertTrue(bounds.pa_bound(18, 16, 0) == 0.5)
        self.assertTrue(_nearly(bounds.pa_bound(16, 16, 0.1), 1.2))
        self.assertTrue(bounds.pa_bound(-10 ** 5, 16, 0) == math.inf)
        self.assertTrue(_nearly(bounds.ecc_bound(0.25, 20, 10), 0.25 * 2 ** -5))

    def testComposition(self):
        for n in (200, 1000, 5000):
            for tau in (0.01, 0.05, 0.1):
                for eps in (0.0, 0.001, 0.02):
                    inp = bounds_input(n, tau, eps, lam=32)
                    g = g_eps(n, tau, eps)
                    composed = bounds.pa_bound(g, 32, eps) + \
                        bounds.ecc_bound(2 ** (-inp.beta * n / 4), g + n / 2, n / 2)
                    self.assertTrue(_nearly(composed, bounds.eps_sec_components(inp)[2]))

    def testMonotoneInBlockLength(self):
        secs = [bounds.eps_sec_components(bounds_input(n, 0.05, 0.01))[2] for n in range(500, 6001, 250)]
        self.assertTrue(all(a >= b for a, b in zip(secs, secs[1:])))
        self.assertTrue(secs[-1] < 0.0201)

    def testMaxEntropy(self):
        self.assertTrue(abs(bounds.max_entropy_bound(bounds_input(100, 0.05, 0.01)) - 32.74) < 0.01)
        inp = bounds_input(100, 0.05, 0.01)
        self.assertTrue(_nearly(bounds.uncertainty_bound(bounds.max_entropy_bound(inp), 100),
                                100 - bounds.max_entropy_bound(inp)))
        self.assertTrue(bounds.chain_rule_bound(50, 8) == 42)
        self.assertTrue(firesException(lambda: bounds.chain_rule_bound(50, -1)))

    def testOverlap(self):
        self.assertTrue(abs(bounds.bb84_overlap() - bounds.BB84_CBAR) < 1e-12)

    def testInputDefaults(self):
        inp = bounds_input(1000, 0.05)
        self.assertTrue(_nearly(inp.eps, 0.1) and inp.k == 2000)
        self.assertTrue(_nearly(inp.code_delta, 2 ** -125))
        self.assertTrue(bounds_input(1000, 0.05, delta=0.5).code_delta == 0.5)
        self.assertTrue(firesException(lambda: bounds_input(1000, 0.45, 0.1)))
        self.assertTrue(firesException(lambda: bounds_input(1000, 0.05, k=10)))
        self.assertTrue(firesException(lambda: bounds_input(0, 0.05)))
        self.assertTrue(bounds.eps_cor(0.01) == 0.01 and firesException(lambda: bounds.eps_cor(2)))

class TestCorruptedBounds(unittest.TestCase):
    def testNoNoise(self):
        inp = bounds_input(400, 0, 0, lam=16, gamma=1)
        result = bounds.corrupted_client_mu(inp)
        self.assertTrue(_nearly(result.hmin, 200))
        self.assertTrue(_nearly(result.eps_pa, 2 ** -92))
        self.assertTrue(_nearly(result.mu, result.eps_pa + result.eps_ec))

    def testServerHasNoSyndromeTerm(self):
        inp = bounds_input(400, 0.01, 0.001, gamma=0.8)
        server = bounds.corrupted_client_mu(inp, "server")
        client = bounds.corrupted_client_mu(inp, "client")
        self.assertTrue(server.eps_ec == 0 and server.mu == server.eps_pa == client.eps_pa)
        self.assertTrue(client.mu > server.mu)
        self.assertTrue(firesException(lambda: bounds.corrupted_client_mu(inp, "eve")))

    def testStrictTargetIsReachable(self):
        inp = bounds_input(400, 0.01, 1e-7, lam=64, gamma=1, beta=0.9)
        self.assertTrue(bounds.corrupted_client_mu(inp).mu < 2 ** -20)

    def testSmoothingFloor(self):
        # mu never drops below 2 eps
        for n in (1000, 10 ** 4, 10 ** 6):
            inp = bounds_input(n, 0.05, 0.01, gamma=0.6, beta=0.5)
            self.assertTrue(bounds.corrupted_client_mu(inp).mu >= 0.02)

class TestReports(unittest.TestCase):
    def testReport(self):
        report = bounds.bounds_report(bounds_input(1000, 0.05, 0.01))
        self.assertTrue(abs(report.g_eps - 172.555) < 0.01)
        self.assertTrue(_nearly(report.eps_sec, report.eps_ec + report.eps_pa))
        d = report.to_dict()
        self.assertTrue(d["eps_sec_clamped"] == d["eps_sec"] <= 1)
        vacuous = bounds.bounds_report(bounds_input(1000, 0.2, 0.01))
        self.assertTrue(vacuous.eps_pa > 1 and vacuous.clamped().eps_pa == 1)
        self.assertTrue(vacuous.to_dict()["eps_pa_clamped"] == 1)

    def testRowsAndTable(self):
        inputs = [bounds_input(n, 0.05, 0.01) for n in (500, 1000, 2000)]
        rows = bounds.bounds_rows(inputs)
        self.assertTrue(len(rows) == 4 and rows[0][0] == "n" and [r[0] for r in rows[1:]] == [500, 1000, 2000])
        if pd:
            table = bounds.bounds_table(inputs)
            self.assertTrue(list(table.columns) == rows[0] and len(table) == 3)
            self.assertTrue(abs(table.set_index("n").loc[1000, "g_eps"] - 172.555) < 0.01)

class TestPlanning(unittest.TestCase):
    def testBlockLength(self):
        found = [bounds.plan_block_length(t, 16, 0.01) for t in (0.5, 0.2, 0.05)]
        self.assertTrue(found == sorted(found) and len(set(found)) == 3)
        for target, n in zip((0.5, 0.2, 0.05), found):
            self.assertTrue(n % bounds.PLANNING_GRANULARITY == 0)
            self.assertTrue(bounds._meets(n, target, 16, 0.01))
            self.assertFalse(bounds._meets(n - bounds.PLANNING_GRANULARITY, target, 16, 0.01))
        self.assertTrue(bounds.plan_block_length(0.5, 16, 0.05) >= found[0])

    def testInfeasible(self):
        ex = firesException(lambda: bounds.plan_block_length(1e-3, 16, 0.01))
        self.assertTrue(isinstance(ex, InfeasibleParameters))
        self.assertTrue(isinstance(firesException(lambda: bounds.plan_block_length(0.5, 16, 0.45)),
                                   InfeasibleParameters))
        self.assertTrue(firesException(lambda: bounds.plan_block_length(0, 16, 0.01)))

    def testPlanParameters(self):
        params = bounds.plan_parameters(0.5, 16, 0.01, 4, setup_seed=2)
        n = max(bounds.plan_block_length(0.5, 16, 0.01), bounds.guess_block_length(16, 0.01))
        self.assertTrue(params.n == n and params.k == 2 * n and params.dictionary_size == 4)
        self.assertTrue(params.lam == 16 and params.gamma == bounds.PLANNING_GAMMA)
        self.assertTrue(bounds.guess_confinement(params).confined)

class TestGuessConfinement(unittest.TestCase):
    def testLeakage(self):
        def tail(d, r):
            return sum(special.comb(d, i) * 0.25 ** i * 0.75 ** (d - i) for i in range(r + 1))
        for d, r in ((48, 3), (16, 3), (192, 12), (10, 0)):
            self.assertTrue(abs(bounds.wrong_guess_leakage(d, r) - tail(d, r)) < 1e-12)
        self.assertTrue(bounds.wrong_guess_leakage(48, 3) < 2 ** -8 < bounds.wrong_guess_leakage(16, 3))
        self.assertTrue(bounds.wrong_guess_leakage(0, 0) == 1)
        self.assertTrue(firesException(lambda: bounds.wrong_guess_leakage(-1, 0)))
        self.assertTrue(firesException(lambda: bounds.wrong_guess_leakage(10, 1.5)))

    def testDeskParameters(self):
        for params in (tiny_params(), medium_params()):
            self.assertFalse(bounds.guess_confinement(params).confined)
            ex = firesException(lambda: bounds.verify_guess_confinement(params))
            self.assertTrue(isinstance(ex, InfeasibleParameters))
        self.assertTrue("coset leaders" in str(firesException(lambda: bounds.verify_guess_confinement(tiny_params()))))
        self.assertTrue(bounds.guess_confinement(tiny_params(dictionary_size=1)).confined)

    def testGuessParameters(self):
        params = guess_params()
        report = bounds.verify_guess_confinement(params)
        self.assertTrue(report.confined and report.leakage < report.limit == 2 ** -8)
        self.assertTrue(params.dictionary.min_distance >= 48 and params.family.radius == 3)

    def testGuessBlockLength(self):
        n = bounds.guess_block_length(16, 0.05, 0.375)
        self.assertTrue(n % bounds.PLANNING_GRANULARITY == 0)
        def planned(block_len):
            return make_params(lam=16, k=2 * block_len, tau="0.05", gamma=0.375, setup_seed=4, family_size=8)
        self.assertTrue(bounds.guess_confinement(planned(n)).confined)
        self.assertTrue(bounds._confines(n, 16, 0.05, 0.375))
        self.assertFalse(bounds._confines(n - bounds.PLANNING_GRANULARITY, 16, 0.05, 0.375))
        self.assertTrue(bounds.guess_block_length(16, 0.01) <= bounds.guess_block_length(16, 0.05))
        self.assertTrue(isinstance(firesException(lambda: bounds.guess_block_length(16, 0.2)), InfeasibleParameters))
        self.assertTrue(firesException(lambda: bounds.guess_block_length(16, 0.6)))

# Run the tests.
if __name__ == "__main__":
    unittest.main()
