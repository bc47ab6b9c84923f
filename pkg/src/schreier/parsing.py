"""Text grammars for ordinals, families, vectors, spaces and functionals.

Recursive descent with precise error positions.  Printers emit the same
grammars canonically, and parsing a printed value returns an equal value;
ordinal literals that are not in normal form are normalised rather than
rejected (the sum is folded through ordinal addition).

    ordinal   := term ('+' term)*
    term      := nat | 'w' ('^' expbase)? ('*' nat)?
    expbase   := nat | 'w' | '(' ordinal ')'
    family    := atom (('[' family ']') | ('(' seq ')'))*
    atom      := 'S(' ordinal ')' | 'A(' nat ')'
    seq       := '[' nat (',' nat)* ']' | 'arith(' nat ',' nat ')' | 'even'
    vector    := coord ':' rational (',' coord ':' rational)*
    space     := 'l1' | 'c0' | 'lp(' number ')' | 'T' | 'S(tol=' number ')'
                 | 'X(' ordinal (',cap=' nat)? ')'
    set       := nat (',' nat)*  (or the empty string)
"""

from __future__ import annotations

from fractions import Fraction
from .families import (
    BracketFamily,
    CardinalityFamily,
    Family,
    FinSet,
    IndexSequence,
    RelabeledFamily,
    S,
    SchreierFamily,
)
from .norms import (
    C0Space,
    L1Space,
    LpSpace,
    MixedSchreierSpace,
    NormSpace,
    SchlumprechtSpace,
    TsirelsonSpace,
)
from .ordinals import ONE, OMEGA, Ordinal, add, finite, omega_power, to_text
from .vectors import Average, Functional, SumNode, Unit, Vector


class ParseError(ValueError):
    """Syntax error carrying the byte offset where parsing failed."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset}: {text!r}")
        self.offset = offset
        self.text = text


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.text, self.pos)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, literal: str) -> bool:
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str) -> None:
        if not self.take(literal):
            raise self.error(f"expected {literal!r}")

    def nat(self) -> int:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a natural number")
        return int(self.text[start : self.pos])

    def number(self) -> float:
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] in ".e-+"):
            self.pos += 1
        if self.pos == start:
            raise self.error("expected a number")
        try:
            return float(self.text[start : self.pos])
        except ValueError:
            raise self.error("malformed number") from None

    def rational(self) -> Fraction:
        sign = -1 if self.take("-") else 1
        num = self.nat()
        if self.take("/"):
            den = self.nat()
            if den == 0:
                raise self.error("zero denominator")
            return Fraction(sign * num, den)
        return Fraction(sign * num)


# ---------------------------------------------------------------------------
# ordinals
# ---------------------------------------------------------------------------


def parse_ordinal(text: str) -> Ordinal:
    sc = _Scanner(text.strip())
    value = _ordinal(sc)
    if not sc.eof():
        raise sc.error("trailing input after ordinal")
    return value


def _ordinal(sc: _Scanner) -> Ordinal:
    total = _ordinal_term(sc)
    while sc.take("+"):
        total = add(total, _ordinal_term(sc))
    return total


def _ordinal_term(sc: _Scanner) -> Ordinal:
    if sc.peek().isdigit():
        return finite(sc.nat())
    if sc.take("w"):
        exponent = ONE
        if sc.take("^"):
            exponent = _expbase(sc)
        coeff = 1
        if sc.take("*"):
            coeff = sc.nat()
            if coeff == 0:
                raise sc.error("zero coefficient")
        return omega_power(exponent, coeff)
    raise sc.error("expected an ordinal term")


def _expbase(sc: _Scanner) -> Ordinal:
    if sc.peek().isdigit():
        return finite(sc.nat())
    if sc.take("("):
        inner = _ordinal(sc)
        sc.expect(")")
        return inner
    if sc.take("w"):
        return OMEGA
    raise sc.error("expected an exponent")


print_ordinal = to_text


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def parse_family(text: str) -> Family:
    sc = _Scanner(text.strip())
    value = _family(sc)
    if not sc.eof():
        raise sc.error("trailing input after family")
    return value


def _family(sc: _Scanner) -> Family:
    fam = _family_atom(sc)
    while True:
        if sc.take("["):
            inner = _family(sc)
            sc.expect("]")
            fam = BracketFamily(fam, inner)
        elif sc.take("("):
            seq = _sequence(sc)
            sc.expect(")")
            fam = RelabeledFamily(fam, seq)
        else:
            return fam


def _family_atom(sc: _Scanner) -> Family:
    if sc.take("S("):
        idx = _ordinal(sc)
        sc.expect(")")
        return SchreierFamily(idx)
    if sc.take("A("):
        bound = sc.nat()
        sc.expect(")")
        return CardinalityFamily(bound)
    raise sc.error("expected S(<ordinal>) or A(<nat>)")


def _sequence(sc: _Scanner) -> IndexSequence:
    if sc.take("["):
        values = [sc.nat()]
        while sc.take(","):
            values.append(sc.nat())
        sc.expect("]")
        return IndexSequence.explicit(values)
    if sc.take("arith("):
        a = sc.nat()
        sc.expect(",")
        d = sc.nat()
        sc.expect(")")
        return IndexSequence.arithmetic(a, d)
    if sc.take("even"):
        return IndexSequence.arithmetic(2, 2)
    raise sc.error("expected [..], arith(a,d) or even")


def print_family(fam: Family) -> str:
    if isinstance(fam, SchreierFamily):
        return f"S({to_text(fam.index)})"
    if isinstance(fam, CardinalityFamily):
        return f"A({fam.bound})"
    if isinstance(fam, BracketFamily):
        return f"{print_family(fam.outer)}[{print_family(fam.inner)}]"
    if isinstance(fam, RelabeledFamily):
        return f"{print_family(fam.base)}({print_sequence(fam.labels)})"
    raise TypeError(f"not a family: {fam!r}")


def parse_sequence(text: str) -> IndexSequence:
    sc = _Scanner(text.strip())
    seq = _sequence(sc)
    if not sc.eof():
        raise sc.error("trailing input after sequence")
    return seq


def print_sequence(seq: IndexSequence) -> str:
    """Grammar text for a sequence.

    Table-extended sequences are out of grammar; their explicit prefix is
    emitted, which is faithful within any horizon the prefix covers.
    """
    if seq.tail_start is not None and not seq.prefix:
        if (seq.tail_start, seq.tail_step) == (2, 2):
            return "even"
        return f"arith({seq.tail_start},{seq.tail_step})"
    return "[" + ",".join(map(str, seq.prefix)) + "]"


# ---------------------------------------------------------------------------
# vectors and sets
# ---------------------------------------------------------------------------


def parse_vector(text: str) -> Vector:
    text = text.strip()
    if not text or text == "0":
        return Vector()
    sc = _Scanner(text)
    data = {}
    while True:
        coord = sc.nat()
        sc.expect(":")
        value = sc.rational()
        if coord in data:
            raise sc.error(f"coordinate {coord} repeated")
        data[coord] = value
        if sc.eof():
            break
        sc.expect(",")
    return Vector.from_dict(data)


def print_vector(x: Vector) -> str:
    return str(x)


def parse_set(text: str) -> FinSet:
    text = text.strip()
    if not text:
        return ()
    sc = _Scanner(text)
    values = [sc.nat()]
    while sc.take(","):
        values.append(sc.nat())
    if not sc.eof():
        raise sc.error("trailing input after set")
    out = tuple(values)
    if any(out[i] >= out[i + 1] for i in range(len(out) - 1)):
        raise ParseError("set must be strictly increasing", text, 0)
    return out


def print_set(E: FinSet) -> str:
    return ",".join(map(str, E))


# ---------------------------------------------------------------------------
# spaces
# ---------------------------------------------------------------------------


def parse_space(text: str) -> NormSpace:
    sc = _Scanner(text.strip())
    space = _space(sc)
    if not sc.eof():
        raise sc.error("trailing input after space")
    return space


def _space(sc: _Scanner) -> NormSpace:
    if sc.take("l1"):
        return L1Space()
    if sc.take("lp("):
        p = sc.number()
        sc.expect(")")
        return LpSpace(p)
    if sc.take("c0"):
        return C0Space()
    if sc.take("T"):
        return TsirelsonSpace()
    if sc.take("S("):
        sc.expect("tol=")
        tol = sc.number()
        sc.expect(")")
        return SchlumprechtSpace(tol)
    if sc.take("S"):
        return SchlumprechtSpace()
    if sc.take("X("):
        xi = _ordinal(sc)
        cap = 64
        if sc.take(","):
            sc.expect("cap=")
            cap = sc.nat()
        sc.expect(")")
        return MixedSchreierSpace(xi, cap)
    raise sc.error("expected l1, lp(p), c0, T, S(tol=..) or X(..)")


def print_space(space: NormSpace) -> str:
    if isinstance(space, L1Space):
        return "l1"
    if isinstance(space, LpSpace):
        return f"lp({space.p:g})"
    if isinstance(space, C0Space):
        return "c0"
    if isinstance(space, TsirelsonSpace):
        return "T"
    if isinstance(space, SchlumprechtSpace):
        return f"S(tol={space.tolerance:g})"
    if isinstance(space, MixedSchreierSpace):
        return f"X({to_text(space.xi)},cap={space.depth_cap})"
    raise TypeError(f"not a space: {space!r}")


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------


def print_functional(f: Functional) -> str:
    if isinstance(f, Unit):
        return f"U({'+' if f.sign > 0 else '-'}{f.coord})"
    if isinstance(f, Average):
        inner = ",".join(print_functional(c) for c in f.children)
        return f"AVG({f.size})[{inner}]"
    if isinstance(f, SumNode):
        inner = ",".join(print_functional(c) for c in f.children)
        return f"SCH[{inner}]"
    raise TypeError(f"not a functional: {f!r}")


def parse_functional(text: str) -> Functional:
    sc = _Scanner(text.strip())
    f = _functional(sc)
    if not sc.eof():
        raise sc.error("trailing input after functional")
    return f


def _functional(sc: _Scanner) -> Functional:
    if sc.take("U("):
        sign = 1
        if sc.take("-"):
            sign = -1
        else:
            sc.take("+")
        coord = sc.nat()
        sc.expect(")")
        return Unit(sign, coord)
    if sc.take("AVG("):
        size = sc.nat()
        sc.expect(")")
        sc.expect("[")
        children = [_functional(sc)]
        while sc.take(","):
            children.append(_functional(sc))
        sc.expect("]")
        return Average(size, tuple(children))
    if sc.take("SCH["):
        children = [_functional(sc)]
        while sc.take(","):
            children.append(_functional(sc))
        sc.expect("]")
        return SumNode(tuple(children))
    raise sc.error("expected U(..), AVG(..)[..] or SCH[..]")
