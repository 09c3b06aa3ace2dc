"""
Experiment driver: scripted adversaries, Monte Carlo statistics, and an executable model of the
ideal password-based key exchange functionality for real/ideal comparisons.
Requires numpy and scipy.
PEP8
"""
import hashlib
import json
import math
import os
import pickle
from collections import namedtuple, Counter
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
import numpy
from qpake.utils import freezable_factory, verify, intish, containerish
from qpake.utils import make_rng, spawn_seeds, verify_seed, Progress
from qpake import qchannel, pake, splitauth, bounds
from qpake.gf2 import BitString, as_bit_string

try:
    import scipy.stats as stats
except:
    stats = None

DROP, FLIP, REPLACE, PASS = "drop", "flip", "replace", "pass"
_rules = (DROP, FLIP, REPLACE, PASS)

TamperRule = namedtuple("TamperRule", ["tag", "rule", "data", "offset"])

def tamper_rule(tag, rule, data=b"", offset=0):
    """
    :param tag: a classical flow tag (or a link initialization tag)

    :param rule: drop, flip (xor data into the message at offset), replace (send data instead) or pass

    :return: TamperRule
    """
    verify(tag in pake.CLASSICAL_TAGS + (splitauth.LINK_HELLO, splitauth.LINK_CONFIRM),
           "unknown flow tag %s" % (tag,))
    verify(rule in _rules, "rule needs to be one of %s" % (_rules,))
    verify(isinstance(data, (bytes, bytearray)), "data needs to be bytes")
    verify(rule != FLIP or (data and any(data)), "a flip rule needs a non-zero mask")
    verify(intish(offset) and offset >= 0, "offset needs to be a non-negative integer")
    return TamperRule(tag, rule, bytes(data), offset)

def _apply_rule(rule, data):
    if rule.rule == DROP:
        return None
    if rule.rule == REPLACE:
        return rule.data
    if rule.rule == PASS or not data:
        return data
    rtn = bytearray(data)
    for i, b in enumerate(rule.data):
        rtn[(rule.offset + i) % len(rtn)] ^= b
    return bytes(rtn)

class AdversaryScript(freezable_factory(object, "_isFrozen")):
    """
    A scripted real-world adversary: a channel model for the quantum flow, tamper rules for the
    classical flows, and optionally a password guess played as a full man-in-the-middle client.
    """
    def __init__(self, quantum=None, classical=(), password_guess=None):
        quantum = quantum if quantum is not None else qchannel.ideal()
        verify(isinstance(quantum, qchannel.ChannelModel), "quantum needs to be a ChannelModel")
        verify(containerish(classical) and all(isinstance(_, TamperRule) for _ in classical),
               "classical needs to be a list of TamperRule")
        verify(len({_.tag for _ in classical}) == len(classical), "at most one rule per flow tag")
        verify(password_guess is None or (intish(password_guess) and password_guess >= 0),
               "password_guess needs to be a password index")
        self.quantum, self.classical, self.password_guess = quantum, tuple(classical), password_guess
        self._isFrozen = True
    @property
    def active_tags(self):
        return {r.tag for r in self.classical if r.rule != PASS}
    def tamper_hook(self):
        """
        :return: callable(direction, tag, data) -> bytes or None, or None for a passive script
        """
        if not self.classical:
            return None
        rules = {r.tag: r for r in self.classical}
        def hook(direction, tag, data):
            return _apply_rule(rules[tag], data) if tag in rules else data
        return hook
    def describe(self):
        return {"quantum": self.quantum.describe(),
                "classical": [[r.tag, r.rule, r.data.hex(), r.offset] for r in self.classical],
                "password_guess": self.password_guess}

# ideal functionality

NewSession = namedtuple("NewSession", ["party", "peer", "pw", "role"])
TestPwd = namedtuple("TestPwd", ["party", "pw"])
NewKey = namedtuple("NewKey", ["party", "sk"])

FRESH, COMPROMISED, INTERRUPTED, COMPLETED = "fresh", "compromised", "interrupted", "completed"

class _Record(object):
    def __init__(self, peer, pw):
        self.peer, self.pw, self.status = peer, pw, FRESH
        self.key, self.fresh_when_keyed, self.tested = None, False, False

class FpwkeState(object):
    """
    State of the ideal functionality for one session identifier.
    """
    def __init__(self, lam, rng, corrupted=()):
        verify(intish(lam) and lam >= 1, "lam needs to be a positive integer")
        self.lam, self.rng = lam, rng
        self.corrupted = frozenset(corrupted)
        self.records = {}
        self.issued = {}
    def status(self, party):
        return self.records[party].status if party in self.records else None
    def _random_key(self):
        return BitString.from_bits(self.rng.integers(0, 2, size=self.lam, dtype=numpy.uint8))

def fpwke_step(state, query):
    """
    Process one query.

    :param state: FpwkeState

    :param query: NewSession, TestPwd or NewKey

    :return: (state, response). NewSession answers ("session", party, peer, role) or None when ignored,
             TestPwd answers "correct guess", "wrong guess" or None (no-op on non-fresh records),
             NewKey answers ("key", party, sk) or None when the record is missing or completed.
    """
    verify(isinstance(state, FpwkeState), "state needs to be a FpwkeState")
    if isinstance(query, NewSession):
        verify(query.party != query.peer, "a party can't run a session with itself")
        if query.party in state.records:
            return state, None
        others = [p for p in state.records if p != query.party]
        if others and (len(state.records) >= 2 or state.records[others[0]].peer != query.party
                       or others[0] != query.peer):
            return state, None
        state.records[query.party] = _Record(query.peer, query.pw)
        return state, ("session", query.party, query.peer, query.role)
    if isinstance(query, TestPwd):
        rec = state.records.get(query.party)
        if rec is None or rec.status != FRESH or rec.tested:
            return state, None
        rec.tested = True
        if query.pw == rec.pw:
            rec.status = COMPROMISED
            return state, "correct guess"
        rec.status = INTERRUPTED
        return state, "wrong guess"
    verify(isinstance(query, NewKey), "unknown query %s" % (query,))
    rec = state.records.get(query.party)
    if rec is None or rec.status == COMPLETED:
        return state, None
    sk = as_bit_string(query.sk)
    verify(len(sk) == state.lam, "sk needs %s bits" % state.lam)
    peer = state.records.get(rec.peer)
    if rec.status == COMPROMISED or query.party in state.corrupted or rec.peer in state.corrupted:
        key = sk
    elif rec.status == FRESH and peer is not None and peer.pw == rec.pw and peer.key is not None \
            and peer.fresh_when_keyed:
        key = peer.key
    else:
        key = state._random_key()
    rec.fresh_when_keyed = rec.status == FRESH
    rec.key, rec.status = key, COMPLETED
    state.issued[query.party] = key
    return state, ("key", query.party, key)

# statistics

class ExperimentStats(object):
    """
    Aggregated outcomes of a set of trials. Counts add under merge, so the reduction is
    associative and independent of the order in which trials finish.
    """
    def __init__(self, config=None):
        self.config = dict(config or {})
        self.trials = self.completions = self.aborts = self.agreements = 0
        self.guess_attempts = self.guess_successes = 0
        self.abort_reasons = Counter()
        self.error_rate_histogram = Counter()
        self.error_rate_sum, self.error_rate_count = 0.0, 0
        self.key_counts = Counter()
        self.key_byte_counts = Counter()
    def _rate(self, count, base=None):
        base = self.trials if base is None else base
        return count / base if base else 0.0
    @property
    def completion_rate(self):
        return self._rate(self.completions)
    @property
    def abort_rate(self):
        return self._rate(self.aborts)
    @property
    def agreement_rate(self):
        return self._rate(self.agreements)
    @property
    def guess_success_rate(self):
        return self._rate(self.guess_successes, self.guess_attempts)
    @property
    def mean_error_rate(self):
        return self.error_rate_sum / self.error_rate_count if self.error_rate_count else 0.0
    def add_trial(self, client, server, transcript, guessed=False):
        """
        :param client: client Outcome

        :param server: server Outcome

        :param transcript: the run's Transcript (for the observed test error rate)

        :param guessed: True if the client was an adversary playing a password guess
        """
        self.trials += 1
        both_keys = client.is_key and server.is_key
        if both_keys:
            self.completions += 1
        else:
            self.aborts += 1
            for o in (client, server):
                if o.is_abort:
                    self.abort_reasons[o.reason] += 1
        agreed = both_keys and client.key == server.key
        self.agreements += agreed
        if guessed:
            self.guess_attempts += 1
            self.guess_successes += agreed
        rate = transcript.observations.get("t1_error_rate")
        if rate is not None:
            self.error_rate_histogram["%.2f" % float(rate)] += 1
            self.error_rate_sum += float(rate)
            self.error_rate_count += 1
        if server.is_key:
            key = server.key
            if len(key) <= 16:
                self.key_counts[key.value] += 1
            for b in bytes.fromhex(key.to_hex()):
                self.key_byte_counts[b] += 1
        return self
    def merge(self, other):
        verify(isinstance(other, ExperimentStats), "can only merge ExperimentStats")
        for attr in ("trials", "completions", "aborts", "agreements", "guess_attempts", "guess_successes",
                     "error_rate_sum", "error_rate_count"):
            setattr(self, attr, getattr(self, attr) + getattr(other, attr))
        for attr in ("abort_reasons", "error_rate_histogram", "key_counts", "key_byte_counts"):
            getattr(self, attr).update(getattr(other, attr))
        return self
    def fingerprint(self):
        return hashlib.sha256(json.dumps(self.config, sort_keys=True).encode("utf-8")).hexdigest()
    def to_dict(self):
        return {"config_fingerprint": self.fingerprint(), "config": self.config, "trials": self.trials,
                "completion_rate": self.completion_rate, "abort_rate": self.abort_rate,
                "agreement_rate": self.agreement_rate, "guess_success_rate": self.guess_success_rate,
                "counts": {"completions": self.completions, "aborts": self.aborts,
                           "agreements": self.agreements, "guess_attempts": self.guess_attempts,
                           "guess_successes": self.guess_successes},
                "abort_reasons": dict(sorted(self.abort_reasons.items())),
                "mean_error_rate": self.mean_error_rate,
                "error_rate_histogram": dict(sorted(self.error_rate_histogram.items())),
                "key_byte_counts": {str(k): v for k, v in sorted(self.key_byte_counts.items())}}
    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)
    def summary_rows(self):
        return [["statistic", "value"], ["trials", self.trials],
                ["completion rate", "%.4f" % self.completion_rate], ["abort rate", "%.4f" % self.abort_rate],
                ["agreement rate", "%.4f" % self.agreement_rate],
                ["guess success rate", "%.4f" % self.guess_success_rate],
                ["mean test error rate", "%.4f" % self.mean_error_rate]] + \
               [["aborts: %s" % k, v] for k, v in sorted(self.abort_reasons.items())]

def _runner(compiled):
    return splitauth.compile_protocol() if compiled else pake.run_session

def _run_trials(params, script, trial_seeds, first_trial, compiled, pw_client, pw_server, transcript_dir,
                config):
    stats_ = ExperimentStats(config)
    runner = _runner(compiled)
    channel, hook = script.quantum, script.tamper_hook()
    for offset, trial_seed in enumerate(trial_seeds):
        guessed = script.password_guess is not None
        if guessed:
            # the honest server's password is unknown to the adversary: uniform per trial
            server_pw = int(make_rng(trial_seed, 1).integers(0, params.dictionary_size))
            client_pw = script.password_guess
        else:
            client_pw, server_pw = pw_client, pw_server
        client, server, transcript = runner(params, client_pw, server_pw, channel, hook, trial_seed)
        stats_.add_trial(client, server, transcript, guessed)
        if transcript_dir:
            transcript.write_file(os.path.join(transcript_dir, "trial_%06d.jsonl" % (first_trial + offset)))
    return stats_

def experiment_config(params, script, trials, seed, compiled, pw_client, pw_server):
    return {"params_fingerprint": params.fingerprint(), "script": script.describe(), "trials": trials,
            "seed": seed, "compiled": bool(compiled), "pw_client": pw_client, "pw_server": pw_server}

def _picklable(*objs):
    try:
        pickle.dumps(objs)
    except (pickle.PicklingError, AttributeError, TypeError):
        return False
    return True

def run_experiment(params, script, trials, seed, compiled=False, pw_client=0, pw_server=0, jobs=1,
                   progress=None, log_file=None, transcript_dir=None, chunk_size=100, check_confinement=True):
    """
    Run independent sessions and aggregate their outcomes.

    :param params: ProtocolParams

    :param script: AdversaryScript

    :param trials: number of sessions

    :param seed: master seed, split into one seed per trial

    :param compiled: apply split authentication

    :param pw_client: client password (ignored by password guess scripts, where the adversary plays the client)

    :param pw_server: server password (uniform per trial under password guess scripts)

    :param jobs: worker processes; the result doesn't depend on it. Scripts that can't be pickled
                 (for example with a lambda hook) fall back to worker threads.

    :param progress: optional Progress

    :param log_file: optional LogFile receiving the summary table

    :param transcript_dir: optional directory receiving one transcript file per trial

    :param check_confinement: for password guess scripts, raise InfeasibleParameters unless the
                              parameters confine a wrong guess (see bounds.guess_confinement)

    :return: ExperimentStats
    """
    verify(isinstance(params, pake.ProtocolParams), "params needs to be a ProtocolParams")
    verify(isinstance(script, AdversaryScript), "script needs to be an AdversaryScript")
    verify(intish(trials) and trials >= 1, "trials needs to be a positive integer")
    verify(intish(jobs) and jobs >= 1, "jobs needs to be a positive integer")
    verify(intish(chunk_size) and chunk_size >= 1, "chunk_size needs to be a positive integer")
    verify(script.password_guess is None or script.password_guess < params.dictionary_size,
           "password_guess needs to be a password index")
    verify(progress is None or isinstance(progress, Progress), "progress needs to be a Progress")
    if transcript_dir:
        verify(os.path.isdir(transcript_dir), "%s is not a directory" % transcript_dir)
    if check_confinement and script.password_guess is not None:
        bounds.verify_guess_confinement(params)
    config = experiment_config(params, script, trials, verify_seed(seed), compiled, pw_client, pw_server)
    seeds = spawn_seeds(seed, trials)
    chunks = [(start, seeds[start:start + chunk_size]) for start in range(0, trials, chunk_size)]
    rtn = ExperimentStats(config)
    def merge(r):
        rtn.merge(r)
        if progress:
            progress.numerical_progress("Trials completed", rtn.trials)
    if jobs == 1 or len(chunks) == 1:
        for start, chunk_seeds in chunks:
            merge(_run_trials(params, script, chunk_seeds, start, compiled, pw_client, pw_server,
                              transcript_dir, config))
    else:
        pool = ProcessPoolExecutor if _picklable(params, script, config) else ThreadPoolExecutor
        with pool(max_workers=min(jobs, len(chunks))) as executor:
            futures = [executor.submit(_run_trials, params, script, chunk_seeds, start, compiled, pw_client,
                                       pw_server, transcript_dir, config) for start, chunk_seeds in chunks]
            # merged in submission order
            for f in futures:
                merge(f.result())
    if log_file:
        log_file.log_table("experiment summary", rtn.summary_rows(), max_write=100)
    return rtn

UniformityReport = namedtuple("UniformityReport", ["collision", "p_value", "samples"])

def estimate_uniformity(keys, lam=None):
    """
    Empirical proxy for the distance of keys from uniform.

    :param keys: at least 1000 keys (BitString, or ints when lam is given)

    :param lam: key length, taken from the keys when they are BitStrings

    :return: UniformityReport with the collision probability estimate and the chi-square p-value
             against the uniform distribution over all 2**lam cells
    """
    verify(stats, "scipy needs to be installed to estimate uniformity")
    verify(containerish(keys) and len(keys) >= 1000, "at least 1000 samples are needed")
    keys = list(keys)
    if lam is None:
        verify(all(isinstance(_, BitString) for _ in keys), "lam is needed for integer keys")
        lam = len(keys[0])
        verify(all(len(_) == lam for _ in keys), "keys need equal lengths")
        keys = [_.value for _ in keys]
    verify(intish(lam) and 1 <= lam <= 16, "chi-square needs 1 <= lam <= 16")
    verify(all(intish(_) and 0 <= _ < 2 ** lam for _ in keys), "keys need to fit in lam bits")
    counts = numpy.bincount(numpy.asarray(keys, dtype=numpy.int64), minlength=2 ** lam)
    n = len(keys)
    collision = float((counts * (counts - 1)).sum()) / (n * (n - 1))
    return UniformityReport(collision, float(stats.chisquare(counts).pvalue), n)

def _sigma(p1, p2, trials):
    return math.sqrt(p1 * (1 - p1) / trials + p2 * (1 - p2) / trials)

def ideal_stats(params, script, trials, seed, pw_client=0, pw_server=0, compiled=False):
    """
    Run the ideal functionality on the events the script expresses: a password guess becomes
    TestPwd, an active classical tamper becomes an interrupted delivery (abort), anything else is
    passive. The adversary's chosen key under a correct guess is its own session key.

    :return: ExperimentStats in the same format as run_experiment
    """
    verify(script.quantum.kind == qchannel.ChannelModel.IDEAL,
           "the ideal functionality only expresses scripts with an ideal quantum channel")
    config = dict(experiment_config(params, script, trials, seed, compiled, pw_client, pw_server), world="ideal")
    rtn = ExperimentStats(config)
    for trial_seed in spawn_seeds(seed, trials):
        rng = make_rng(trial_seed, 2)
        state = FpwkeState(params.lam, rng)
        guessed = script.password_guess is not None
        if guessed:
            client_pw = script.password_guess
            server_pw = int(make_rng(trial_seed, 1).integers(0, params.dictionary_size))
        else:
            client_pw, server_pw = pw_client, pw_server
        fpwke_step(state, NewSession("P1", "P2", client_pw, pake.CLIENT))
        fpwke_step(state, NewSession("P2", "P1", server_pw, pake.SERVER))
        empty = pake.Transcript({})
        if script.active_tags:
            rtn.add_trial(pake.Outcome("abort", pake.AUTHENTICATION), pake.Outcome("abort", pake.TIMEOUT), empty)
            continue
        adversary_key = BitString.from_bits(rng.integers(0, 2, size=params.lam, dtype=numpy.uint8))
        if guessed:
            # the adversary plays the client, so only the server's record can be tested
            reply = fpwke_step(state, TestPwd("P2", client_pw))[1]
            server_key = fpwke_step(state, NewKey("P2", adversary_key))[1][2]
            client_key = adversary_key if reply == "correct guess" else \
                BitString.from_bits(rng.integers(0, 2, size=params.lam, dtype=numpy.uint8))
        else:
            client_key = fpwke_step(state, NewKey("P1", adversary_key))[1][2]
            server_key = fpwke_step(state, NewKey("P2", adversary_key))[1][2]
        rtn.add_trial(pake.Outcome("key", pake.SessionKey(client_key)),
                      pake.Outcome("key", pake.SessionKey(server_key)), empty, guessed)
    return rtn

def compare_real_ideal(params, script, trials, seed, compiled=False, pw_client=0, pw_server=0, jobs=1,
                       check_confinement=True):
    """
    Run matched real sessions and ideal functionality sessions and compare their rates. The real
    sessions take jobs and check_confinement as run_experiment does.

    :return: dict with the real and ideal rates, their differences, the standard error of each
             difference, and whether each difference is within 3 standard errors
    """
    real = run_experiment(params, script, trials, seed, compiled, pw_client, pw_server, jobs=jobs,
                          check_confinement=check_confinement)
    ideal = ideal_stats(params, script, trials, seed, pw_client, pw_server, compiled)
    rtn = {"trials": trials, "real": {}, "ideal": {}, "difference": {}, "sigma": {}, "within_3_sigma": {}}
    for name in ("abort_rate", "agreement_rate", "guess_success_rate"):
        r, i = getattr(real, name), getattr(ideal, name)
        base = real.guess_attempts if name == "guess_success_rate" else trials
        sigma = _sigma(r, i, base) if base else 0.0
        rtn["real"][name], rtn["ideal"][name] = r, i
        rtn["difference"][name] = r - i
        rtn["sigma"][name] = sigma
        rtn["within_3_sigma"][name] = abs(r - i) <= 3 * sigma + 1e-12
    return rtn
