import itertools
import unittest
from collections import Counter
import qpake.crypto as crypto
from qpake.crypto import TOY_GROUP, HIDING, BINDING, keygen, commit, verify_open, equivocate, extract
from qpake.utils import make_rng, ModeError
from qpake.testing.qpaketestutils import firesException, tiny_params

_q = TOY_GROUP.q

def _all_keys(mode):
    for alpha, beta in itertools.product(range(1, _q), repeat=2):
        if mode == BINDING:
            yield keygen(TOY_GROUP, BINDING, None, (alpha, beta))
        else:
            for delta in range(_q):
                if delta != alpha * beta % _q:
                    yield keygen(TOY_GROUP, HIDING, None, (alpha, beta, delta))

def _openings():
    return itertools.product(range(_q), repeat=2)

class TestGroups(unittest.TestCase):
    def testFixedGroups(self):
        self.assertTrue((TOY_GROUP.p, TOY_GROUP.q, TOY_GROUP.g) == (23, 11, 2))
        self.assertTrue(TOY_GROUP.primes_check())
        self.assertTrue(crypto.MODP_2048.p.bit_length() == 2048 and crypto.MODP_2048.primes_check())
        self.assertTrue(pow(crypto.MODP_2048.g, crypto.MODP_2048.q, crypto.MODP_2048.p) == 1)
        self.assertTrue(firesException(lambda: crypto.GroupParams(23, 11, 5)))

    def testGenerate(self):
        group = crypto.generate_group(32, make_rng(1))
        self.assertTrue(group.primes_check() and group.p == 2 * group.q + 1 and group.g != 1)
        self.assertTrue(group == crypto.generate_group(32, make_rng(1)))
        self.assertTrue(crypto.GroupParams.from_dict(group.to_dict()) == group)
        self.assertTrue(group.element_from_hex(group.element_to_hex(group.g)) == group.g)
        self.assertTrue(firesException(lambda: group.element_from_hex(group.element_to_hex(group.p - 1))))

class TestCommitments(unittest.TestCase):
    def testWorkedExample(self):
        key, trapdoor = keygen(TOY_GROUP, BINDING, None, (3, 5))
        self.assertTrue(key.elements == (2, 8, 9, 16))
        c, o = commit(key, 1, None, (2, 3))
        self.assertTrue(tuple(c) == (1, 2) and verify_open(key, c, o))
        self.assertTrue(extract(trapdoor, c) == 1)
        bad = crypto.Commitment(c.c1, c.c2 * 4 % 23)
        self.assertTrue(extract(trapdoor, bad) is None)

    def testKeyModes(self):
        self.assertTrue(firesException(lambda: keygen(TOY_GROUP, HIDING, None, (3, 5, 4))))
        rng = make_rng(2)
        for _ in range(200):
            key, trapdoor = keygen(TOY_GROUP, HIDING, rng)
            self.assertTrue(trapdoor.delta != trapdoor.alpha * trapdoor.beta % _q)
        for key, trapdoor in _all_keys(BINDING):
            self.assertTrue(key.v == pow(key.h, trapdoor.beta, 23) and key.u == pow(2, trapdoor.beta, 23))
        binding, hiding = keygen(TOY_GROUP, BINDING, rng)[0], keygen(TOY_GROUP, HIDING, rng)[0]
        self.assertTrue(set(binding.to_dict()) == set(hiding.to_dict()))
        self.assertTrue(list(map(len, binding.to_dict().values())) == list(map(len, hiding.to_dict().values())))

    def testPerfectBinding(self):
        for key, trapdoor in _all_keys(BINDING):
            zeros = {tuple(commit(key, 0, None, o)[0]) for o in _openings()}
            ones = {tuple(commit(key, 1, None, o)[0]) for o in _openings()}
            self.assertTrue(len(zeros) == len(ones) == _q ** 2)
            self.assertFalse(zeros & ones)
            self.assertTrue(all(extract(trapdoor, commit(key, m, None, o)[0]) == m
                                for m in (0, 1) for o in _openings()))

    def testPerfectHiding(self):
        for key, trapdoor in itertools.islice(_all_keys(HIDING), 0, None, 7):
            zeros = Counter(tuple(commit(key, 0, None, o)[0]) for o in _openings())
            ones = Counter(tuple(commit(key, 1, None, o)[0]) for o in _openings())
            self.assertTrue(zeros == ones and set(zeros.values()) == {1})

    def testEquivocation(self):
        for key, trapdoor in itertools.islice(_all_keys(HIDING), 0, None, 13):
            for m1, m2 in itertools.product((0, 1), repeat=2):
                produced = set()
                for r, s in _openings():
                    c, o1 = commit(key, m1, None, (r, s))
                    o2 = equivocate(trapdoor, c, o1, m2)
                    self.assertTrue(verify_open(key, c, o2) and o2.m == m2)
                    if m1 == m2:
                        self.assertTrue(o2 == o1)
                    produced.add((o2.r, o2.s))
                # equivocated randomness is a permutation of the fresh randomness
                self.assertTrue(len(produced) == _q ** 2)

    def testVerifyOpen(self):
        rng = make_rng(3)
        for mode in (BINDING, HIDING):
            key = keygen(TOY_GROUP, mode, rng)[0]
            for m in (0, 1):
                c, o = commit(key, m, rng)
                self.assertTrue(verify_open(key, c, o))
                self.assertFalse(verify_open(key, c, o._replace(m=1 - m)))
                self.assertFalse(verify_open(key, c, o._replace(r=_q)))
                self.assertFalse(verify_open(key, c, (m, o.r)))
        # the accept set is exactly the brute force preimage
        key = keygen(TOY_GROUP, BINDING, rng)[0]
        table = {}
        for m, r, s in itertools.product((0, 1), range(_q), range(_q)):
            table.setdefault(tuple(commit(key, m, None, (r, s))[0]), set()).add((m, r, s))
        for c, preimage in itertools.islice(table.items(), 0, None, 5):
            accepted = {o for o in itertools.product((0, 1), range(_q), range(_q))
                        if verify_open(key, crypto.Commitment(*c), crypto.Opening(*o))}
            self.assertTrue(accepted == preimage and len(preimage) == 1)

    def testTrapdoorModeErrors(self):
        rng = make_rng(4)
        binding_key, binding_td = keygen(TOY_GROUP, BINDING, rng)
        hiding_key, hiding_td = keygen(TOY_GROUP, HIDING, rng)
        c, o = commit(binding_key, 1, rng)
        self.assertTrue(isinstance(firesException(lambda: equivocate(binding_td, c, o, 0)), ModeError))
        c, o = commit(hiding_key, 1, rng)
        self.assertTrue(isinstance(firesException(lambda: extract(hiding_td, c)), ModeError))

    def testRandomRoundTrip(self):
        group = tiny_params().group
        rng = make_rng(5)
        key = keygen(group, BINDING, rng)[0]
        for _ in range(2000):
            m = int(rng.integers(0, 2))
            c, o = commit(key, m, rng)
            self.assertTrue(verify_open(key, c, o))

    def testCommitBits(self):
        for group in (TOY_GROUP, tiny_params().group):
            key = keygen(group, BINDING, make_rng(7))[0]
            bits = [int(_) for _ in make_rng(8).integers(0, 2, 300)]
            commitments, openings = crypto.commit_bits(key, bits, make_rng(9))
            self.assertTrue(len(commitments) == len(openings) == 300)
            self.assertTrue([o.m for o in openings] == bits)
            self.assertTrue(all(verify_open(key, c, o) for c, o in zip(commitments, openings)))
            self.assertTrue(all(commit(key, o.m, None, (o.r, o.s))[0] == c for c, o in zip(commitments, openings)))
            self.assertTrue(crypto.commit_bits(key, bits, make_rng(9)) == (commitments, openings))
            self.assertTrue(len({(o.r, o.s) for o in openings}) > 1)
            self.assertTrue(firesException(lambda: crypto.commit_bits(key, [0, 2], make_rng(9))))
        exponents = crypto.random_exponents(TOY_GROUP, make_rng(10), 5000)
        self.assertTrue(len(exponents) == 5000 and set(exponents) == set(range(_q)))

class TestSignatures(unittest.TestCase):
    def testRoundTripAndMutations(self):
        group = tiny_params().group
        rng = make_rng(6)
        pair, other = crypto.sig_keygen(group, rng), crypto.sig_keygen(group, rng)
        for i in range(1000):
            message = rng.bytes(int(rng.integers(1, 40)))
            sig = crypto.sign(group, pair.sk, message, rng)
            self.assertTrue(crypto.verify_sig(group, pair.vk, message, sig))
            bit = int(rng.integers(0, 8 * len(message)))
            mutated = bytearray(message)
            mutated[bit // 8] ^= 1 << (bit % 8)
            self.assertFalse(crypto.verify_sig(group, pair.vk, bytes(mutated), sig))
            bit = int(rng.integers(0, 8 * len(sig)))
            mutated = bytearray(sig)
            mutated[bit // 8] ^= 1 << (bit % 8)
            self.assertFalse(crypto.verify_sig(group, pair.vk, message, bytes(mutated)))
            if i < 50:
                self.assertFalse(crypto.verify_sig(group, other.vk, message, sig))
        self.assertFalse(crypto.verify_sig(group, pair.vk, b"m", b"short"))

    def testLargeGroup(self):
        group = crypto.MODP_2048
        rng = make_rng(7)
        pair = crypto.sig_keygen(group, rng)
        sig = crypto.sign(group, pair.sk, b"hello", rng)
        self.assertTrue(len(sig) == 2 * group.exponent_bytes)
        self.assertTrue(crypto.verify_sig(group, pair.vk, b"hello", sig))
        self.assertFalse(crypto.verify_sig(group, pair.vk, b"hellp", sig))

# Run the tests.
if __name__ == "__main__":
    unittest.main()
