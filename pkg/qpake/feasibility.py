"""
OT-core detection for finite deterministic two-party functions, and the EQUALITY instance.
PEP8
"""
from itertools import product
from qpake.utils import verify, intish, containerish, QPakeError

EXHAUSTIVE_LIMIT = 10 ** 4

class TwoPartyFunction(object):
    """
    A deterministic two-party function over finite alphabets. f_a[x][y] is party A's output and
    f_b[x][y] is party B's output on inputs x in gamma_a, y in gamma_b.
    """
    def __init__(self, gamma_a, gamma_b, f_a, f_b):
        """
        :param gamma_a: A's input alphabet (a sequence of hashable labels)

        :param gamma_b: B's input alphabet

        :param f_a: a table of A's outputs, rows indexed like gamma_a, columns like gamma_b

        :param f_b: a table of B's outputs, same shape as f_a
        """
        self.gamma_a, self.gamma_b = tuple(gamma_a), tuple(gamma_b)
        for name, gamma in (("gamma_a", self.gamma_a), ("gamma_b", self.gamma_b)):
            verify(len(gamma) >= 1 and len(set(gamma)) == len(gamma), "%s needs distinct labels" % name)
        for name, table in (("f_a", f_a), ("f_b", f_b)):
            verify(containerish(table) and len(table) == len(self.gamma_a) and
                   all(containerish(row) and len(row) == len(self.gamma_b) for row in table),
                   "%s needs to be defined on the full %s x %s domain" %
                   (name, len(self.gamma_a), len(self.gamma_b)))
        self.f_a = tuple(tuple(row) for row in f_a)
        self.f_b = tuple(tuple(row) for row in f_b)
        self._index_a = {x: i for i, x in enumerate(self.gamma_a)}
        self._index_b = {y: i for i, y in enumerate(self.gamma_b)}
    def outputs(self, x, y):
        verify(x in self._index_a, "%s is not in gamma_a" % (x,))
        verify(y in self._index_b, "%s is not in gamma_b" % (y,))
        i, j = self._index_a[x], self._index_b[y]
        return self.f_a[i][j], self.f_b[i][j]
    def relabeled(self, map_a, map_b):
        """
        :param map_a: dict, bijection from gamma_a to new labels

        :param map_b: dict, bijection from gamma_b to new labels

        :return: the same function over the new labels
        """
        verify(set(map_a) == set(self.gamma_a) and len(set(map_a.values())) == len(map_a),
               "map_a needs to be a bijection on gamma_a")
        verify(set(map_b) == set(self.gamma_b) and len(set(map_b.values())) == len(map_b),
               "map_b needs to be a bijection on gamma_b")
        return TwoPartyFunction([map_a[x] for x in self.gamma_a], [map_b[y] for y in self.gamma_b],
                                self.f_a, self.f_b)

def is_ot_core(f, quad):
    """
    :param f: TwoPartyFunction

    :param quad: (x, x', y, y')

    :return: True iff f_A(x,y) = f_A(x,y') and f_B(x,y) = f_B(x',y) and
             (f_A(x',y) != f_A(x',y') or f_B(x,y') != f_B(x',y'))
    """
    verify(isinstance(f, TwoPartyFunction), "f needs to be a TwoPartyFunction")
    verify(containerish(quad) and len(quad) == 4, "quad needs to be (x, x', y, y')")
    x, x2, y, y2 = quad
    a_xy, b_xy = f.outputs(x, y)
    a_xy2, b_xy2 = f.outputs(x, y2)
    a_x2y, b_x2y = f.outputs(x2, y)
    a_x2y2, b_x2y2 = f.outputs(x2, y2)
    return a_xy == a_xy2 and b_xy == b_x2y and (a_x2y != a_x2y2 or b_xy2 != b_x2y2)

def find_ot_cores(f):
    """
    Exhaustive search, for |gamma_a| * |gamma_b| <= 10^4.

    :return: every OT-core quadruple, in alphabet order of (x, x', y, y')
    """
    verify(isinstance(f, TwoPartyFunction), "f needs to be a TwoPartyFunction")
    if len(f.gamma_a) * len(f.gamma_b) > EXHAUSTIVE_LIMIT:
        raise QPakeError("exhaustive OT-core search is unsupported above %s input pairs" % EXHAUSTIVE_LIMIT)
    fa, fb = f.f_a, f.f_b
    na, nb = len(f.gamma_a), len(f.gamma_b)
    rtn = []
    for i, i2 in product(range(na), repeat=2):
        if i == i2:
            continue
        for j, j2 in product(range(nb), repeat=2):
            if fa[i][j] == fa[i][j2] and fb[i][j] == fb[i2][j] and \
               (fa[i2][j] != fa[i2][j2] or fb[i][j2] != fb[i2][j2]):
                rtn.append((f.gamma_a[i], f.gamma_a[i2], f.gamma_b[j], f.gamma_b[j2]))
    return rtn

def equality_function(size):
    """
    EQUALITY over {0, ..., size-1}: both parties learn whether x = y
    """
    verify(intish(size) and size >= 2, "the alphabet needs at least 2 symbols")
    table = [[int(x == y) for y in range(size)] for x in range(size)]
    return TwoPartyFunction(range(size), range(size), table, table)

def equality_core(c):
    """
    the EQUALITY quadruple (c, c+1, c-1, c+1) for an interior symbol c
    """
    return (c, c + 1, c - 1, c + 1)

def read_function_table(text):
    """
    Parse a function table: a header line "|gamma_a| |gamma_b|", then |gamma_a| rows of f_A values,
    then |gamma_a| rows of f_B values, whitespace separated. Blank lines and lines starting with #
    are skipped. Inputs are labeled 0, 1, ...

    :return: TwoPartyFunction
    """
    lines = [(i + 1, l.split()) for i, l in enumerate(text.splitlines())
             if l.strip() and not l.strip().startswith("#")]
    verify(lines, "the function table is empty")
    line_no, header = lines[0]
    try:
        na, nb = map(int, header)
    except ValueError:
        raise QPakeError("line %s: the header needs two alphabet sizes" % line_no)
    verify(na >= 1 and nb >= 1, "line %s: alphabet sizes need to be positive" % line_no)
    verify(len(lines) == 1 + 2 * na, "the table needs %s rows after the header, got %s" %
           (2 * na, len(lines) - 1))
    rows = []
    for line_no, fields in lines[1:]:
        verify(len(fields) == nb, "line %s: expected %s values, got %s" % (line_no, nb, len(fields)))
        try:
            rows.append([int(_) for _ in fields])
        except ValueError:
            raise QPakeError("line %s: output values need to be integers" % line_no)
    return TwoPartyFunction(range(na), range(nb), rows[:na], rows[na:])
