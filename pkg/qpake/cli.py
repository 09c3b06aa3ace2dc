"""
Command line entry point: run experiments, tabulate bounds, search OT-cores, run the test suite.
Configuration files are INI text with [protocol], [adversary] and [run] sections.
PEP8
"""
import configparser
import getopt
import json
import os
import sys
import unittest
from collections import namedtuple
from fractions import Fraction
from qpake.utils import verify, QPakeError, LogFile, Progress, SEED_LIMIT
from qpake import qchannel, pake, harness, bounds, feasibility
from qpake.gf2 import DEFAULT_FAMILY_SIZE

SUBCOMMANDS = ("run", "bounds", "otcore", "selftest")
EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2

_channels = {"ideal": lambda p: qchannel.ideal(), "bitflip": qchannel.bit_flip,
             "intercept_random": lambda p: qchannel.intercept_resend(),
             "intercept_plus": lambda p: qchannel.intercept_resend(qchannel.Basis.PLUS),
             "intercept_times": lambda p: qchannel.intercept_resend(qchannel.Basis.TIMES)}

# (key, kind, default) in canonical order
_schema = {"protocol": [("lambda", "int", 16), ("k", "int", 1024), ("alpha", "fraction", Fraction(1, 4)),
                        ("tau", "fraction", Fraction(1, 20)), ("gamma", "float", 0.375), ("beta", "float", 0.5),
                        ("dictionary_size", "int", 16), ("group_bits", "int", 64),
                        ("family_size", "int", DEFAULT_FAMILY_SIZE), ("syndrome_len", "int", None)],
           "adversary": [("channel", "channel", "ideal"), ("p", "float", 0.0), ("password_guess", "int", None),
                         ("tamper", "tamper", ())],
           "run": [("trials", "int", 100), ("seed", "int", 0), ("jobs", "int", 1), ("out", "str", None),
                   ("compile", "bool", False), ("pw_client", "int", 0), ("pw_server", "int", 0),
                   ("transcripts", "bool", False)]}

Config = namedtuple("Config", ["protocol", "adversary", "run"])

def default_config():
    return Config(*[{key: default for key, _, default in _schema[s]} for s in Config._fields])

def _key_lines(text):
    rtn, section = {}, None
    for i, line in enumerate(text.splitlines()):
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip()
        elif section and "=" in stripped and not stripped.startswith(("#", ";")):
            rtn.setdefault((section, stripped.split("=", 1)[0].strip().lower()), i + 1)
    return rtn

def _parse_tamper(value):
    rtn = []
    for item in filter(None, (_.strip() for _ in value.split(","))):
        fields = item.split(":")
        verify(len(fields) in (2, 3), "tamper entries need the form tag:rule[:hex], got %s" % item)
        data = bytes.fromhex(fields[2]) if len(fields) == 3 else b""
        rtn.append((fields[0], fields[1], data))
    return tuple(rtn)

def _parse_value(kind, value):
    if kind == "int":
        return int(value)
    if kind == "float":
        return float(value)
    if kind == "fraction":
        return Fraction(value)
    if kind == "bool":
        verify(value.lower() in configparser.ConfigParser.BOOLEAN_STATES, "expected a boolean, got %s" % value)
        return configparser.ConfigParser.BOOLEAN_STATES[value.lower()]
    if kind == "channel":
        verify(value in _channels, "channel needs to be one of %s" % sorted(_channels))
        return value
    if kind == "tamper":
        return _parse_tamper(value)
    return value

def _check_invariants(config, where):
    pr, adv, run = config
    def check(b, msg, *keys):
        if not b:
            lines = [where[k] for k in keys if k in where]
            raise QPakeError("%s%s" % ("line %s: " % min(lines) if lines else "", msg))
    check(pr["lambda"] >= 1, "lambda needs to be a positive integer", ("protocol", "lambda"))
    check(pr["k"] >= 1, "k needs to be a positive integer", ("protocol", "k"))
    check(0 < pr["alpha"] < Fraction(1, 2), "alpha needs to be in (0, 1/2)", ("protocol", "alpha"))
    check((pr["alpha"] * pr["k"]).denominator == 1, "alpha * k needs to be integral",
          ("protocol", "alpha"), ("protocol", "k"))
    n = pr["k"] - 2 * int(pr["alpha"] * pr["k"])
    check(n >= 1, "n = k - 2 alpha k needs to be at least 1", ("protocol", "alpha"), ("protocol", "k"))
    check(0 < pr["tau"] < Fraction(1, 2), "tau needs to be in (0, 1/2)", ("protocol", "tau"))
    check(0 <= pr["gamma"] <= 1, "gamma needs to be in [0, 1]", ("protocol", "gamma"))
    check(pr["beta"] > 0, "beta needs to be positive", ("protocol", "beta"))
    check(pr["dictionary_size"] >= 1, "dictionary_size needs to be positive", ("protocol", "dictionary_size"))
    check(pr["group_bits"] >= 8, "group_bits needs to be at least 8", ("protocol", "group_bits"))
    check(pr["family_size"] >= 1, "family_size needs to be positive", ("protocol", "family_size"))
    check(pr["lambda"] <= (n + 1) // 2, "lambda can't exceed ell = %s" % ((n + 1) // 2),
          ("protocol", "lambda"), ("protocol", "k"))
    check(pr["syndrome_len"] is None or 1 <= pr["syndrome_len"] <= (n + 1) // 2,
          "syndrome_len needs to be in [1, ell]", ("protocol", "syndrome_len"))
    check(0 <= adv["p"] <= 1, "p needs to be in [0, 1]", ("adversary", "p"))
    for key in ("password_guess", ):
        check(adv[key] is None or 0 <= adv[key] < pr["dictionary_size"],
              "%s needs to be a password index" % key, ("adversary", key))
    tags = pake.CLASSICAL_TAGS + (harness.splitauth.LINK_HELLO, harness.splitauth.LINK_CONFIRM)
    for tag, rule, data in adv["tamper"]:
        check(tag in tags, "unknown flow tag %s" % tag, ("adversary", "tamper"))
        check(rule in harness._rules, "unknown tamper rule %s" % rule, ("adversary", "tamper"))
        check(rule != harness.FLIP or any(data), "a flip rule needs a non-zero mask", ("adversary", "tamper"))
    check(len({_[0] for _ in adv["tamper"]}) == len(adv["tamper"]), "at most one rule per flow tag",
          ("adversary", "tamper"))
    check(run["trials"] >= 1, "trials needs to be positive", ("run", "trials"))
    check(0 <= run["seed"] < SEED_LIMIT, "seed needs to be in [0, 2**64)", ("run", "seed"))
    check(run["jobs"] >= 1, "jobs needs to be positive", ("run", "jobs"))
    for key in ("pw_client", "pw_server"):
        check(0 <= run[key] < pr["dictionary_size"], "%s needs to be a password index" % key, ("run", key))

def parse_config(text):
    """
    Parse and validate configuration text. Keys missing from the text take their defaults.

    :param text: INI text (str or bytes)

    :return: Config. Raises QPakeError naming the offending line for unknown sections or keys,
             type mismatches and violated parameter rules.
    """
    if isinstance(text, (bytes, bytearray)):
        text = bytes(text).decode("utf-8")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as e:
        raise QPakeError("line %s: a section header is needed before any key" % e.lineno)
    except configparser.DuplicateOptionError as e:
        raise QPakeError("line %s: duplicate key %s" % (e.lineno, e.option))
    except configparser.DuplicateSectionError as e:
        raise QPakeError("line %s: duplicate section %s" % (e.lineno, e.section))
    except configparser.ParsingError as e:
        raise QPakeError("line %s: unparseable line" % e.errors[0][0])
    where = _key_lines(text)
    section_lines = {s: i + 1 for i, l in enumerate(text.splitlines()) for s in [l.strip()[1:-1].strip()]
                     if l.strip().startswith("[")}
    rtn = default_config()
    for section in parser.sections():
        if section not in _schema:
            raise QPakeError("line %s: unknown section [%s]" % (section_lines.get(section, "?"), section))
        kinds = {key: kind for key, kind, _ in _schema[section]}
        for key, value in parser.items(section):
            line = where.get((section, key), "?")
            if key not in kinds:
                raise QPakeError("line %s: unknown key %s in [%s]" % (line, key, section))
            try:
                getattr(rtn, section)[key] = _parse_value(kinds[key], value.strip())
            except (ValueError, ZeroDivisionError, QPakeError) as e:
                raise QPakeError("line %s: %s needs a %s value, got %s (%s)" % (line, key, kinds[key], value, e))
    _check_invariants(rtn, where)
    return rtn

def _render_value(kind, value):
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    if kind == "tamper":
        return ",".join("%s:%s%s" % (tag, rule, ":" + data.hex() if data else "") for tag, rule, data in value)
    return str(value)

def serialize_config(config):
    """
    :return: the canonical text of config; parse_config(serialize_config(c)) == c
    """
    verify(isinstance(config, Config), "config needs to be a Config")
    lines = []
    for section in Config._fields:
        lines.append("[%s]" % section)
        for key, kind, _ in _schema[section]:
            value = getattr(config, section)[key]
            if value is not None and value != ():
                lines.append("%s = %s" % (key, _render_value(kind, value)))
        lines.append("")
    return "\n".join(lines)

def config_params(config):
    """
    :return: ProtocolParams; the setup seed is the run seed, so one seed drives everything
    """
    pr = config.protocol
    return pake.make_params(lam=pr["lambda"], k=pr["k"], alpha=pr["alpha"], tau=pr["tau"], gamma=pr["gamma"],
                            beta=pr["beta"], dictionary_size=pr["dictionary_size"], setup_seed=config.run["seed"],
                            group_bits=pr["group_bits"], family_size=pr["family_size"],
                            syndrome_len=pr["syndrome_len"])

def config_script(config):
    adv = config.adversary
    return harness.AdversaryScript(_channels[adv["channel"]](adv["p"]),
                                   [harness.tamper_rule(tag, rule, data) for tag, rule, data in adv["tamper"]],
                                   adv["password_guess"])

def _print_table(rows, out=None):
    width = max(max(len(str(_)) for row in rows for _ in row) + 2, 10)
    for row in rows:
        print("".join(("%.6g" % _ if isinstance(_, float) else str(_)).ljust(width) for _ in row), file=out)

def _run(opts):
    config_file, overrides, quiet = None, {}, False
    for o, a in opts:
        if o == "--config":
            config_file = a
        elif o in ("--seed", "--trials", "--jobs"):
            overrides[o[2:]] = int(a)
        elif o == "--out":
            overrides["out"] = a
        elif o == "--quiet":
            quiet = True
    if config_file is not None:
        verify(os.path.isfile(config_file), "config file %s not found" % config_file)
        with open(config_file, "r") as f:
            config = parse_config(f.read())
    else:
        config = default_config()
    config.run.update(overrides)
    _check_invariants(config, {})
    run = config.run
    params, script = config_params(config), config_script(config)
    transcript_dir = None
    if run["out"]:
        os.makedirs(run["out"], exist_ok=True)
        if run["transcripts"]:
            transcript_dir = os.path.join(run["out"], "transcripts")
            os.makedirs(transcript_dir, exist_ok=True)
    with LogFile(os.path.join(run["out"], "summary.log") if run["out"] else None) as log_file:
        stats = harness.run_experiment(params, script, run["trials"], run["seed"], compiled=run["compile"],
                                       pw_client=run["pw_client"], pw_server=run["pw_server"], jobs=run["jobs"],
                                       progress=Progress(quiet), log_file=log_file,
                                       transcript_dir=transcript_dir)
    if not quiet:
        _print_table(stats.summary_rows())
    record = stats.to_json()
    print(record)
    if run["out"]:
        with open(os.path.join(run["out"], "stats.jsonl"), "w") as f:
            f.write(record + "\n")
        with open(os.path.join(run["out"], "config.ini"), "w") as f:
            f.write(serialize_config(config))
    return EXIT_OK

def _floats(a):
    return [float(_) for _ in a.split(",")]

def _bounds(opts):
    ns, taus, eps = [1000], [0.05], [0.01]
    kwargs = {}
    out = None
    for o, a in opts:
        if o == "--n":
            ns = [int(_) for _ in a.split(",")]
        elif o == "--tau":
            taus = _floats(a)
        elif o == "--eps":
            eps = _floats(a)
        elif o == "--lambda":
            kwargs["lam"] = int(a)
        elif o in ("--gamma", "--beta", "--cbar"):
            kwargs[o[2:]] = float(a)
        elif o == "--out":
            out = a
    inputs = [bounds.bounds_input(n, t, e, **kwargs) for n in ns for t in taus for e in eps]
    rows = bounds.bounds_rows(inputs)
    _print_table(rows)
    for inp, row in zip(inputs, rows[1:]):
        record = dict(zip(rows[0], row), record="bounds")
        record.update(bounds.bounds_report(inp).to_dict())
        print(json.dumps(record, sort_keys=True))
    if out:
        with LogFile(out) as log_file:
            log_file.log_table("bounds", rows, formatter=lambda _: "%.6g" % _ if isinstance(_, float) else str(_),
                               max_write=len(rows))
    return EXIT_OK

def _otcore(opts, args):
    table_file = dict(opts).get("--table", args[0] if args else None)
    verify(table_file, "otcore needs a function table file (--table PATH)")
    verify(os.path.isfile(table_file), "table file %s not found" % table_file)
    with open(table_file, "r") as f:
        f_ = feasibility.read_function_table(f.read())
    cores = feasibility.find_ot_cores(f_)
    for core in cores:
        print("%s %s %s %s" % core)
    print(json.dumps({"record": "otcore", "count": len(cores), "cores": [list(_) for _ in cores]}, sort_keys=True))
    return EXIT_OK

def _selftest(opts):
    pattern = dict(opts).get("--pattern", "test_*.py")
    testing_dir = os.path.join(os.path.dirname(os.path.abspath(__file__)), "testing")
    top_level = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    suite = unittest.defaultTestLoader.discover(testing_dir, pattern=pattern, top_level_dir=top_level)
    result = unittest.TextTestRunner(verbosity=1).run(suite)
    return EXIT_OK if result.wasSuccessful() else EXIT_ERROR

_long_options = {"run": ["help", "config=", "seed=", "trials=", "jobs=", "out=", "quiet"],
                 "bounds": ["help", "n=", "tau=", "eps=", "lambda=", "gamma=", "beta=", "cbar=", "out="],
                 "otcore": ["help", "table="],
                 "selftest": ["help", "pattern="]}

def usage(subcommand=None):
    if subcommand in _long_options:
        print("qpake %s %s" % (subcommand, " ".join("--%s" % (_[:-1] + " <value>" if _.endswith("=") else _)
                                                 for _ in _long_options[subcommand])))
    else:
        print("qpake {%s} [options]; qpake <subcommand> --help for the options" % ",".join(SUBCOMMANDS))

def dispatch(argv):
    """
    :param argv: the arguments after the program name

    :return: exit code, 0 on success, 1 on runtime or configuration errors, 2 on usage errors
    """
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            usage()
            return EXIT_OK
        print("unknown subcommand %s" % (argv[0] if argv else "(none)"))
        usage()
        return EXIT_USAGE
    subcommand = argv[0]
    try:
        opts, args = getopt.getopt(argv[1:], "h", _long_options[subcommand])
    except getopt.GetoptError as err:
        print(str(err))
        usage(subcommand)
        return EXIT_USAGE
    if any(o in ("-h", "--help") for o, _ in opts):
        usage(subcommand)
        return EXIT_OK
    try:
        if subcommand == "run":
            return _run(opts)
        if subcommand == "bounds":
            return _bounds(opts)
        if subcommand == "otcore":
            return _otcore(opts, args)
        return _selftest(opts)
    except ValueError as e:
        print("bad option value: %s" % e)
        usage(subcommand)
        return EXIT_USAGE
    except QPakeError as e:
        print("qpake %s failed: %s" % (subcommand, e))
        return EXIT_ERROR

def main():
    sys.exit(dispatch(sys.argv[1:]))

if __name__ == "__main__":
    main()
