"""Recursive-descent parser and vectorized evaluator for complex expressions.

Grammar (see ``docs/grammar.md``)::

    expr     = term { ("+" | "-") term }
    term     = unary { ("*" | "/") unary }
    unary    = "-" unary | power
    power    = atom [ "^" exponent ]
    exponent = [ "-" ] INTEGER [ "^" exponent ]
    atom     = NUMBER [ "i" ] | "i" | "pi" | "e" | VAR
             | FUNC "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus, which binds tighter than ``*`` and
``/``. Exponents are integer literals; ``a^2^3`` folds to ``a^8``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ArgumentError, DimensionError, DomainError, NumericError, ParseError, PoleProximityError
from .numeric import TAU_POLE, Polynomial, RationalFunction, as_points

FUNCTIONS = ("exp", "sin", "cos", "log")
CONSTANTS = {"pi": math.pi, "e": math.e}
TAU_LOG = 1e-12
MAX_DEPTH = 200
MAX_EXPONENT = 10_000


# AST -------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float
    imag: bool = False


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def _fmt_float(x):
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(float(x))


def to_source(node, dim):
    """Render an AST back to source with the minimal parentheses."""
    if isinstance(node, Num):
        text = _fmt_float(node.value)
        return text + "i" if node.imag else text
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Var):
        return "z" if dim == 1 else f"z{node.index + 1}"
    if isinstance(node, Neg):
        inner = to_source(node.operand, dim)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(node, Pow):
        base = to_source(node.base, dim)
        if _prec(node.base) <= 4:
            base = f"({base})"
        return f"{base}^{node.exponent}"
    if isinstance(node, Call):
        return f"{node.func}({to_source(node.arg, dim)})"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_source(node.left, dim)
        right = to_source(node.right, dim)
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left}{node.op}{right}"
    raise TypeError(f"not an expression node: {node!r}")


def _walk(node):
    yield node
    for child in ("operand", "left", "right", "base", "arg"):
        sub = getattr(node, child, None)
        if sub is not None and not isinstance(sub, (int, float, str)):
            yield from _walk(sub)


# tokenizer -------------------------------------------------------------------

def _tokenize(src):
    tokens = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if _isdig(ch) or (ch == "." and i + 1 < n and _isdig(src[i + 1])):
            while i < n and _isdig(src[i]):
                i += 1
            is_int = True
            if i < n and src[i] == ".":
                is_int = False
                i += 1
                while i < n and _isdig(src[i]):
                    i += 1
            if i < n and src[i] in "eE":
                j = i + 1
                if j < n and src[j] in "+-":
                    j += 1
                if j < n and _isdig(src[j]):
                    is_int = False
                    i = j
                    while i < n and _isdig(src[i]):
                        i += 1
            text = src[start:i]
            imag = False
            if i < n and src[i] == "i" and not (i + 1 < n and (src[i + 1].isalnum() or src[i + 1] == "_")):
                imag = True
                i += 1
            tokens.append(("num", (text, is_int and not imag, imag), start))
            continue
        if ch.isascii() and (ch.isalpha() or ch == "_"):
            while i < n and src[i].isascii() and (src[i].isalnum() or src[i] == "_"):
                i += 1
            tokens.append(("ident", src[start:i], start))
            continue
        if ch in "+-*/^(),":
            tokens.append((ch, ch, start))
            i += 1
            continue
        raise ParseError(_byte_offset(src, start), "a number, name, operator or parenthesis", src)
    tokens.append(("end", None, n))
    return tokens


def _isdig(ch):
    return "0" <= ch <= "9"


def _byte_offset(src, pos):
    return len(src[:pos].encode("utf-8", errors="surrogatepass"))


class _Parser:
    def __init__(self, src, dim):
        self.src = src
        self.dim = dim
        self.tokens = _tokenize(src)
        self.pos = 0
        self.depth = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected, tok=None):
        tok = tok or self.peek()
        raise ParseError(_byte_offset(self.src, tok[2]), expected, self.src)

    def expect(self, kind, expected):
        if self.peek()[0] != kind:
            self.fail(expected)
        return self.advance()

    def enter(self):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail(f"nesting depth at most {MAX_DEPTH}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail("an operator or end of input")
        return node

    def expr(self):
        self.enter()
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            node = BinOp(op, node, self.term())
        self.depth -= 1
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.advance()
            self.enter()
            node = Neg(self.unary())
            self.depth -= 1
            return node
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            base = Pow(base, self.exponent())
        return base

    def exponent(self):
        sign = 1
        if self.peek()[0] == "-":
            self.advance()
            sign = -1
        tok = self.peek()
        if tok[0] != "num" or not tok[1][1] or len(tok[1][0]) > 6:
            self.fail("an integer exponent")
        self.advance()
        mag = int(tok[1][0])
        if self.peek()[0] == "^":
            self.advance()
            self.enter()
            inner = self.exponent()
            self.depth -= 1
            if inner < 0 or (mag > 1 and inner > 64):
                self.fail("a non-negative integer exponent of moderate size", tok)
            mag = mag**inner
        value = sign * mag
        if abs(value) > MAX_EXPONENT:
            self.fail(f"an exponent of magnitude at most {MAX_EXPONENT}", tok)
        return value

    def atom(self):
        tok = self.peek()
        kind = tok[0]
        if kind == "num":
            self.advance()
            text, _, imag = tok[1]
            value = float(text)
            if not math.isfinite(value):
                self.fail("a finite number", tok)
            return Num(value, imag)
        if kind == "ident":
            self.advance()
            name = tok[1]
            if name == "i":
                return Num(1.0, True)
            if name in CONSTANTS:
                return Const(name)
            if name in FUNCTIONS:
                self.expect("(", "'(' after function name")
                self.enter()
                arg = self.expr()
                self.depth -= 1
                self.expect(")", "')'")
                return Call(name, arg)
            if name == "z":
                if self.dim != 1:
                    raise DimensionError(f"variable 'z' is only valid in dimension 1 (got dimension {self.dim})")
                return Var(0)
            if name[0] == "z" and name[1:].isdigit() and name[1] != "0" and len(name) < 12:
                k = int(name[1:])
                if k > self.dim:
                    raise DimensionError(f"variable '{name}' exceeds dimension {self.dim}")
                return Var(k - 1)
            self.fail("a number, variable, constant or function name", tok)
        if kind == "(":
            self.advance()
            self.enter()
            node = self.expr()
            self.depth -= 1
            self.expect(")", "')'")
            return node
        self.fail("a number, variable, function or '('")


# public API ------------------------------------------------------------------

class FunctionExpr:
    """Parsed expression in ``dim`` complex variables.

    Immutable; two expressions compare equal when their trees are identical.
    """

    __slots__ = ("dim", "root", "source")

    def __init__(self, root, dim, source=None):
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "source", source if source is not None else to_source(root, dim))

    def __setattr__(self, name, value):
        raise AttributeError("FunctionExpr is immutable")

    def __eq__(self, other):
        return isinstance(other, FunctionExpr) and self.dim == other.dim and self.root == other.root

    def __hash__(self):
        return hash((self.dim, self.root))

    def __repr__(self):
        return f"FunctionExpr({self.source!r}, dim={self.dim})"

    def __str__(self):
        return self.source

    def pretty(self):
        return to_source(self.root, self.dim)

    @property
    def has_log(self):
        return any(isinstance(n, Call) and n.func == "log" for n in _walk(self.root))

    @property
    def is_polynomial(self):
        for n in _walk(self.root):
            if isinstance(n, Call):
                return False
            if isinstance(n, Pow) and n.exponent < 0:
                return False
            if isinstance(n, BinOp) and n.op == "/" and _has_var(n.right):
                return False
        return True

    def evaluate(self, points, tau_pole=TAU_POLE):
        """Vectorized values at ``points`` of shape ``(N, dim)``."""
        points = np.asarray(points, dtype=complex)
        if points.ndim != 2 or points.shape[1] != self.dim:
            raise DimensionError(f"points of shape {points.shape} do not match dimension {self.dim}")
        with np.errstate(all="ignore"):
            vals = _eval(self.root, points, tau_pole)
        vals = np.broadcast_to(vals, (points.shape[0],)).astype(complex, copy=True)
        bad = ~np.isfinite(vals)
        if np.any(bad):
            i = int(np.argmax(bad))
            raise NumericError(f"non-finite value of {self.source!r} at {points[i].tolist()}")
        return vals

    def __call__(self, z):
        pts, single = as_points(z, self.dim)
        vals = self.evaluate(pts)
        return complex(vals[0]) if single else vals


def _has_var(node):
    return any(isinstance(n, Var) for n in _walk(node))


def _eval(node, pts, tau_pole):
    if isinstance(node, Num):
        return np.complex128(complex(0, node.value) if node.imag else complex(node.value))
    if isinstance(node, Const):
        return np.complex128(CONSTANTS[node.name])
    if isinstance(node, Var):
        return pts[:, node.index]
    if isinstance(node, Neg):
        return -_eval(node.operand, pts, tau_pole)
    if isinstance(node, BinOp):
        a = _eval(node.left, pts, tau_pole)
        b = _eval(node.right, pts, tau_pole)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        _check_pole(b, a, pts, tau_pole)
        return a / b
    if isinstance(node, Pow):
        base = _eval(node.base, pts, tau_pole)
        k = node.exponent
        out = _ipow(base, abs(k))
        if k < 0:
            one = np.complex128(1.0)
            _check_pole(out, one, pts, tau_pole)
            out = one / out
        return out
    if isinstance(node, Call):
        w = _eval(node.arg, pts, tau_pole)
        if node.func == "exp":
            return np.exp(w)
        if node.func == "sin":
            return np.sin(w)
        if node.func == "cos":
            return np.cos(w)
        small = np.abs(w) < TAU_LOG
        if np.any(small):
            i = int(np.argmax(np.broadcast_to(small, (pts.shape[0],))))
            raise DomainError(f"log argument {complex(np.broadcast_to(w, (pts.shape[0],))[i]):.3e} too close to 0 at {pts[i].tolist()}")
        return np.log(w)
    raise TypeError(f"not an expression node: {node!r}")


def _ipow(z, k):
    result = np.ones_like(z) if np.ndim(z) else np.complex128(1.0)
    base = z
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def _check_pole(den, num, pts, tau_pole):
    close = np.abs(den) < tau_pole * (1.0 + np.abs(num))
    if np.any(close):
        close = np.broadcast_to(close, (pts.shape[0],))
        i = int(np.argmax(close))
        d = complex(np.broadcast_to(den, (pts.shape[0],))[i])
        raise PoleProximityError(
            f"division by |{abs(d):.3e}| at {pts[i].tolist()}", point=pts[i], magnitude=abs(d)
        )


def parse(src, dim=1):
    """Parse ``src`` into a `FunctionExpr` of ``dim`` variables.

    Raises `ParseError` (with a byte offset) on malformed input and
    `DimensionError` when a variable index exceeds ``dim``.
    """
    if isinstance(src, (bytes, bytearray)):
        src = bytes(src).decode("utf-8", errors="replace")
    if not isinstance(src, str):
        raise ArgumentError("expression source must be a string")
    if int(dim) < 1:
        raise ArgumentError("dimension must be >= 1")
    if not src.strip():
        raise ParseError(0, "a non-empty expression", src)
    root = _Parser(src, int(dim)).parse()
    return FunctionExpr(root, dim, src)


def expr_eval(f, z):
    """Value of ``f`` at a single point ``z``."""
    pts, single = as_points(z, f.dim)
    if not single:
        raise DimensionError("expr_eval takes a single point")
    return complex(f.evaluate(pts)[0])


def parse_complex(text):
    """A complex constant written in expression syntax, e.g. ``"1-2i"`` or ``"exp(i*pi/4)"``."""
    f = parse(str(text), 1)
    if _has_var(f.root):
        raise ArgumentError(f"constant expected, got {text!r}")
    return complex(f.evaluate(np.zeros((1, 1), dtype=complex))[0])


def parse_point(text, dim=None):
    """Comma-separated complex coordinates, e.g. ``"1+i, 2"``."""
    parts = [p for p in str(text).split(",")]
    z = np.array([parse_complex(p) for p in parts], dtype=complex)
    if dim is not None and len(z) != dim:
        raise DimensionError(f"point {text!r} has {len(z)} coordinates, expected {dim}")
    return z


def evaluator(f, dim=None):
    """Return ``(callable, dim)`` for any function-like object.

    Accepts expression strings, objects with an ``evaluate(points)`` method
    (`FunctionExpr`, `Polynomial`, `RationalFunction`, partial fractions),
    and plain callables mapping ``(N, dim)`` arrays to ``(N,)`` arrays.
    """
    if isinstance(f, str):
        f = parse(f, dim or 1)
    if hasattr(f, "evaluate"):
        fdim = getattr(f, "dim", dim)
        if dim is not None and fdim is not None and fdim != dim:
            raise DimensionError(f"function has dimension {fdim}, expected {dim}")
        return f.evaluate, (fdim if fdim is not None else dim)
    if callable(f):
        if dim is None:
            raise ArgumentError("dimension required for a plain callable")
        return (lambda pts: np.asarray(f(pts), dtype=complex).reshape(-1)), dim
    raise ArgumentError(f"cannot evaluate object of type {type(f).__name__}")


def require_holomorphic(f, assume_holomorphic=False):
    """Refuse expressions containing ``log`` unless holomorphy is asserted."""
    if isinstance(f, FunctionExpr) and f.has_log and not assume_holomorphic:
        raise ArgumentError(
            f"{f.source!r} contains log (branch cut on the negative real axis); "
            "pass assume_holomorphic=True if it is holomorphic on the domain"
        )


def expr_lipschitz_bound(f, box, samples=4096, dim=None):
    """Finite-difference estimate of the Lipschitz constant of ``f`` on a box.

    ``box`` is a pair ``(lower, upper)`` of complex vectors; the box is
    ``lower.re <= Re z <= upper.re`` and likewise for the imaginary parts.
    ``f`` may be a single function or a list (a map into C^m); for a list the
    Frobenius norm of the complex Jacobian is used, which bounds the
    operator norm. The result is an estimate from a deterministic sample
    grid with about ``samples`` nodes, not a certified bound.
    """
    funcs = list(f) if isinstance(f, (list, tuple)) else [f]
    funcs = [parse(g, dim or 1) if isinstance(g, str) else g for g in funcs]
    dim = dim or getattr(funcs[0], "dim", None)
    if dim is None:
        raise ArgumentError("dimension required for a plain callable")
    lo = np.atleast_1d(np.asarray(box[0], dtype=complex))
    hi = np.atleast_1d(np.asarray(box[1], dtype=complex))
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise DimensionError("box corners do not match the function dimension")
    per_axis = max(3, int(round(samples ** (1.0 / (2 * dim)))))
    axes = []
    for j in range(dim):
        axes.append(np.linspace(lo[j].real, hi[j].real, per_axis))
        axes.append(np.linspace(lo[j].imag, hi[j].imag, per_axis))
    grid = np.meshgrid(*axes, indexing="ij")
    real = np.stack([g.reshape(-1) for g in grid], axis=1)
    pts = real[:, 0::2] + 1j * real[:, 1::2]
    scale = max(1.0, float(np.max(np.abs(np.concatenate([lo, hi])))))
    step = 1e-6 * scale
    sq = np.zeros(pts.shape[0])
    for g in funcs:
        ev, _ = evaluator(g, dim)
        ev(pts)  # raises on a pole at a sample node, naming it
        for j in range(dim):
            e = np.zeros(dim, dtype=complex)
            e[j] = step
            d = (ev(pts + e) - ev(pts - e)) / (2 * step)
            sq += np.abs(d) ** 2
    return float(np.sqrt(np.max(sq)))


def to_rational(f, dim=None):
    """Rewrite a call-free expression as a `RationalFunction` (no cancellation).

    >>> r = to_rational("1/z + 1")
    >>> r(2)
    (1.5+0j)
    """
    if isinstance(f, str):
        f = parse(f, dim or 1)
    d = f.dim

    def rec(node):
        if isinstance(node, (Num, Const)):
            c = _eval(node, np.zeros((1, d), dtype=complex), TAU_POLE)
            return Polynomial.constant(complex(c), d), Polynomial.constant(1.0, d)
        if isinstance(node, Var):
            return Polynomial.variable(node.index, d), Polynomial.constant(1.0, d)
        if isinstance(node, Neg):
            a, b = rec(node.operand)
            return -a, b
        if isinstance(node, BinOp):
            a, b = rec(node.left)
            c, e = rec(node.right)
            if node.op == "+":
                return (a + c, b) if b == e else (a * e + c * b, b * e)
            if node.op == "-":
                return (a - c, b) if b == e else (a * e - c * b, b * e)
            if node.op == "*":
                return a * c, b * e
            if c.is_zero:
                raise PoleProximityError("division by an identically zero expression")
            return a * e, b * c
        if isinstance(node, Pow):
            a, b = rec(node.base)
            k = node.exponent
            if k < 0:
                if a.is_zero:
                    raise PoleProximityError("negative power of an identically zero expression")
                a, b, k = b, a, -k
            return a ** k, b ** k
        raise ArgumentError(f"{node.func} is not a rational operation")

    num, den = rec(f.root)
    return RationalFunction(num, den)
