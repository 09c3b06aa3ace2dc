import os
import unittest
import numpy
import qpake.utils as utils
from qpake import LogFile, Progress
from qpake.testing.qpaketestutils import firesException, makeCleanDir

class TestUtils(unittest.TestCase):
    def testVerify(self):
        ex = firesException(lambda: utils.verify(False, "boom"))
        self.assertTrue(isinstance(ex, utils.QPakeError) and "boom" in str(ex))
        self.assertFalse(firesException(lambda: utils.verify(True, "boom")))
        for cls in (utils.UsageError, utils.ModeError, utils.AuthenticationAbort, utils.InfeasibleParameters):
            self.assertTrue(issubclass(cls, utils.QPakeError))

    def testIshFunctions(self):
        self.assertTrue(utils.intish(3) and utils.intish(numpy.int64(3)))
        self.assertFalse(utils.intish(True) or utils.intish(3.0))
        self.assertTrue(utils.numericish(0.5) and not utils.numericish("0.5"))
        self.assertTrue(utils.stringish("abc") and utils.containerish([1]) and utils.dictish({}))

    def testFreezable(self):
        class Thing(utils.freezable_factory(object, "_isFrozen", {"counter"})):
            def __init__(self):
                self.value, self.counter = 1, 0
                self._isFrozen = True
        t = Thing()
        self.assertTrue(firesException(lambda: setattr(t, "value", 2)))
        self.assertTrue(firesException(lambda: setattr(t, "other", 2)))
        t.counter += 1
        self.assertTrue(t.counter == 1 and t.value == 1)

    def testMakeRng(self):
        a, b = utils.make_rng(5), utils.make_rng(5)
        self.assertTrue((a.integers(0, 2 ** 32, 100) == b.integers(0, 2 ** 32, 100)).all())
        c, d = utils.make_rng(5, 1), utils.make_rng(5, 2)
        self.assertFalse((c.integers(0, 2 ** 32, 100) == d.integers(0, 2 ** 32, 100)).all())
        self.assertTrue(isinstance(utils.make_rng(5).bit_generator, numpy.random.Philox))
        self.assertTrue(firesException(lambda: utils.make_rng(-1)))
        self.assertTrue(firesException(lambda: utils.make_rng(2 ** 64)))
        self.assertFalse(firesException(lambda: utils.make_rng(2 ** 64 - 1)))

    def testSpawnSeeds(self):
        seeds = utils.spawn_seeds(17, 50)
        self.assertTrue(len(set(seeds)) == 50 and all(0 <= s < 2 ** 64 for s in seeds))
        self.assertTrue(utils.spawn_seeds(17, 10) == seeds[:10])
        self.assertTrue(utils.spawn_seeds(18, 10) != seeds[:10])

    def testRandomBelow(self):
        rng = utils.make_rng(3)
        draws = [utils.random_below(rng, 11) for _ in range(2000)]
        self.assertTrue(set(draws) == set(range(11)))
        big = 2 ** 200 + 5
        self.assertTrue(all(0 <= utils.random_below(rng, big) < big for _ in range(100)))
        self.assertTrue(utils.random_below(rng, 1) == 0)
        self.assertTrue(len(utils.rng_randfunc(rng)(13)) == 13)

    def testLogFile(self):
        makeCleanDir(_scratchDir)
        path = os.path.join(_scratchDir, "log.txt")
        with LogFile(path) as f:
            f.log_table("stuff", [["a", "b"], [1, 2], [3, 4], [5, 6]], max_write=2)
        with open(path) as f:
            text = f.read()
        self.assertTrue("Table stuff" in text and "first 2 entries out of 3" in text)
        self.assertTrue("5" not in text.split("\n", 2)[-1])
        with LogFile(None) as f:
            f.log_table("nothing", [["a"], [1]])
        self.assertTrue(firesException(lambda: LogFile(None).log_table("bad", [["a", "b"], [1]])))

    def testProgress(self):
        self.assertTrue(Progress(quiet=True).numerical_progress("trials", 10))
        self.assertTrue(firesException(lambda: Progress(quiet=True).numerical_progress(3, 10)))

_scratchDir = TestUtils.__name__ + "_scratch"

# Run the tests.
if __name__ == "__main__":
    unittest.main()
