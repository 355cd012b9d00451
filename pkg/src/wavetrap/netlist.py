"""Parser and serializer for the line-oriented ``.dds`` netlist format.

One directive per line, ``#`` starts a comment::

    model <name> tem er=<x> [tand=<x>]
    model <name> waveguide a=<len> er=<x> [tand=<x>]
    line <name> model=<m> L=<len>
    trapper <name> model=<m> L1=<len> [mode=ideal|unitary] loop k=<x> L2=<len> [loop ...]
    cascade <name> <child> [<child> ...] [repeat=<n>]
    top <name>
    sweep <f_lo> <f_hi> <n_points>
    pulse f0=<freq> sigma_f=<freq>

Dimensioned values need a unit suffix: lengths ``m mm mil in``, frequencies
``Hz kHz MHz GHz``. Values are scaled with exact rational arithmetic so that
``1in``, ``25.4mm`` and ``1000mil`` parse to the same float. Blocks may be
referenced before they are defined. Parsing stops at the first problem and
raises a :class:`NetlistError` carrying its 1-based line and column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .analysis import FrequencyGrid
from .dispersion import LineModel
from .errors import WaveTrapError
from .network import Cascade, JunctionMode, Line, Loop, Trapper

__all__ = [
    "NetlistError",
    "Netlist",
    "SweepRun",
    "PulseRun",
    "parse",
    "parse_file",
    "parse_quantity",
    "serialize",
    "LENGTH_UNITS",
    "FREQUENCY_UNITS",
]

LENGTH_UNITS = {
    "m": Fraction(1),
    "mm": Fraction(1, 1000),
    "mil": Fraction(254, 10_000_000),
    "in": Fraction(254, 10_000),
}
FREQUENCY_UNITS = {
    "Hz": Fraction(1),
    "kHz": Fraction(10**3),
    "MHz": Fraction(10**6),
    "GHz": Fraction(10**9),
}

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_PLAIN = re.compile(_NUMBER + r"\Z")
_QUANTITY = re.compile(rf"({_NUMBER})([A-Za-z]*)\Z")


class NetlistError(WaveTrapError):
    def __init__(self, message: str, line: int, col: int, path: str | None = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col
        self.path = path

    def __str__(self):
        where = f"{self.path}:" if self.path else ""
        return f"{where}{self.line}:{self.col}: {self.message}"


@dataclass(frozen=True)
class SweepRun:
    grid: FrequencyGrid


@dataclass(frozen=True)
class PulseRun:
    f0: float
    sigma_f: float


@dataclass
class Netlist:
    models: dict[str, LineModel]
    blocks: dict[str, object]
    top: str
    runs: list = field(default_factory=list)
    # names referenced by each block: its model, or a cascade's children
    refs: dict[str, tuple[str, ...]] = field(default_factory=dict)

    @property
    def root(self):
        return self.blocks[self.top]

    @property
    def sweeps(self) -> list[SweepRun]:
        return [r for r in self.runs if isinstance(r, SweepRun)]

    @property
    def pulses(self) -> list[PulseRun]:
        return [r for r in self.runs if isinstance(r, PulseRun)]


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [_Tok(m.group(), lineno, m.start() + 1) for m in re.finditer(r"\S+", body)]
        if toks:
            yield toks


def _to_float(value: Fraction, tok: _Tok) -> float:
    try:
        return float(value)
    except OverflowError:
        raise NetlistError(f"value '{tok.text}' out of range", tok.line, tok.col) from None


def parse_quantity(text: str, units: dict[str, Fraction], what: str = "value",
                   line: int = 1, col: int = 1) -> float:
    """Parse ``<number><unit>`` into SI using exact rational scaling."""
    tok = _Tok(text, line, col)
    m = _QUANTITY.match(text)
    if not m:
        raise NetlistError(f"invalid {what} '{text}'", line, col)
    number, unit = m.groups()
    if not unit:
        raise NetlistError(
            f"{what} '{text}' needs a unit ({', '.join(units)})", line, col
        )
    if unit not in units:
        raise NetlistError(
            f"unknown unit '{unit}' for {what} (expected one of {', '.join(units)})",
            line, col + len(number),
        )
    return _to_float(Fraction(number) * units[unit], tok)


def _plain(tok: _Tok, text: str, what: str) -> float:
    if not _PLAIN.match(text):
        raise NetlistError(f"invalid number '{text}' for {what}", tok.line, tok.col)
    return _to_float(Fraction(text), tok)


class _Directive:
    """Positional tokens and key=value options of one directive."""

    def __init__(self, toks: list[_Tok]):
        self.head = toks[0]
        self.positional: list[_Tok] = []
        self.options: dict[str, tuple[_Tok, str]] = {}
        for tok in toks[1:]:
            if "=" in tok.text:
                key, _, value = tok.text.partition("=")
                if not key or not value:
                    raise NetlistError(f"malformed option '{tok.text}'", tok.line, tok.col)
                if key in self.options:
                    raise NetlistError(f"duplicate option '{key}'", tok.line, tok.col)
                self.options[key] = (tok, value)
            else:
                self.positional.append(tok)

    def value_col(self, key: str) -> int:
        tok, _ = self.options[key]
        return tok.col + len(key) + 1

    def require(self, key: str) -> tuple[_Tok, str]:
        if key not in self.options:
            raise NetlistError(
                f"'{self.head.text}' is missing required option '{key}='",
                self.head.line, self.head.col,
            )
        return self.options[key]

    def check_keys(self, allowed: set[str]) -> None:
        for key, (tok, _) in self.options.items():
            if key not in allowed:
                raise NetlistError(
                    f"unknown option '{key}' for '{self.head.text}'", tok.line, tok.col
                )

    def plain(self, key: str, default=None):
        if key not in self.options:
            return default
        tok, value = self.options[key]
        return _plain(_Tok(value, tok.line, self.value_col(key)), value, key)

    def quantity(self, key: str, units, what: str) -> float:
        tok, value = self.require(key)
        return parse_quantity(value, units, what, tok.line, self.value_col(key))


def _name(tok: _Tok) -> str:
    if not _NAME.match(tok.text):
        raise NetlistError(f"invalid name '{tok.text}'", tok.line, tok.col)
    return tok.text


def _build_checked(factory, tok: _Tok):
    try:
        return factory()
    except WaveTrapError as exc:
        raise NetlistError(str(exc), tok.line, tok.col) from None


@dataclass
class _Decl:
    kind: str
    name_tok: _Tok
    refs: list[_Tok]
    build: object  # callable(resolved refs) -> block


class _Parser:
    def __init__(self, path):
        self.path = path
        self.models: dict[str, LineModel] = {}
        self.decls: dict[str, _Decl] = {}
        self.defined: dict[str, _Tok] = {}
        self.top: _Tok | None = None
        self.runs: list = []
        self.last_line = 1

    def declare(self, tok: _Tok) -> str:
        name = _name(tok)
        if name in self.defined:
            first = self.defined[name]
            raise NetlistError(
                f"duplicate name '{name}' (first defined at line {first.line})", tok.line, tok.col
            )
        self.defined[name] = tok
        return name

    def expect_positional(self, d: _Directive, count: int, usage: str) -> list[_Tok]:
        if len(d.positional) < count:
            raise NetlistError(f"expected: {usage}", d.head.line, d.head.col)
        if len(d.positional) > count:
            extra = d.positional[count]
            raise NetlistError(f"unexpected token '{extra.text}'; expected: {usage}",
                               extra.line, extra.col)
        return d.positional

    # directives -----------------------------------------------------------

    def do_model(self, toks):
        d = _Directive(toks)
        usage = "model <name> tem|waveguide [a=<len>] er=<x> [tand=<x>]"
        name_tok, kind_tok = self.expect_positional(d, 2, usage)
        name = self.declare(name_tok)
        kind = kind_tok.text
        if kind == "tem":
            d.check_keys({"er", "tand"})
            width = None
        elif kind == "waveguide":
            d.check_keys({"a", "er", "tand"})
            width = d.quantity("a", LENGTH_UNITS, "length")
        else:
            raise NetlistError(f"unknown model kind '{kind}' (expected tem or waveguide)",
                               kind_tok.line, kind_tok.col)
        d.require("er")
        er = d.plain("er")
        tand = d.plain("tand", 0.0)
        self.models[name] = _build_checked(
            lambda: LineModel(kind, er, tand, width), name_tok
        )

    def do_line(self, toks):
        d = _Directive(toks)
        (name_tok,) = self.expect_positional(d, 1, "line <name> model=<m> L=<len>")
        name = self.declare(name_tok)
        d.check_keys({"model", "L"})
        model_ref = self._ref(d, "model")
        length = d.quantity("L", LENGTH_UNITS, "length")
        self.decls[name] = _Decl(
            "line", name_tok, [model_ref], lambda model: Line(model, length)
        )

    def do_trapper(self, toks):
        # split at 'loop' keywords: the header, then one group per loop
        groups = [[]]
        for tok in toks:
            if tok.text == "loop":
                groups.append([tok])
            else:
                groups[-1].append(tok)
        d = _Directive(groups[0])
        usage = "trapper <name> model=<m> L1=<len> [mode=ideal|unitary] loop k=<x> L2=<len>"
        (name_tok,) = self.expect_positional(d, 1, usage)
        name = self.declare(name_tok)
        d.check_keys({"model", "L1", "mode"})
        model_ref = self._ref(d, "model")
        l1 = d.quantity("L1", LENGTH_UNITS, "length")
        mode = JunctionMode.IDEAL
        if "mode" in d.options:
            value = d.options["mode"][1]
            if value not in ("ideal", "unitary"):
                raise NetlistError(f"unknown mode '{value}' (expected ideal or unitary)",
                                   d.head.line, d.value_col("mode"))
            mode = JunctionMode(value)
        if len(groups) == 1:
            raise NetlistError("trapper needs at least one 'loop k=<x> L2=<len>'",
                               name_tok.line, name_tok.col)
        loops = []
        for group in groups[1:]:
            ld = _Directive(group)
            if ld.positional:
                extra = ld.positional[0]
                raise NetlistError(f"unexpected token '{extra.text}' in loop", extra.line, extra.col)
            ld.check_keys({"k", "L2"})
            ld.require("k")
            k = ld.plain("k")
            l2 = ld.quantity("L2", LENGTH_UNITS, "length")
            loops.append(_build_checked(lambda: Loop(k, l2), ld.head))
        loops = tuple(loops)
        # check coupling sums now so the diagnostic points at this directive
        probe = LineModel.tem(1.0)
        _build_checked(lambda: Trapper(probe, l1, loops, mode), name_tok)
        self.decls[name] = _Decl(
            "trapper", name_tok, [model_ref], lambda model: Trapper(model, l1, loops, mode)
        )

    def do_cascade(self, toks):
        d = _Directive(toks)
        if not d.positional:
            raise NetlistError("expected: cascade <name> <child> [<child> ...] [repeat=<n>]",
                               d.head.line, d.head.col)
        name = self.declare(d.positional[0])
        children = d.positional[1:]
        if not children:
            raise NetlistError("cascade needs at least one child", d.positional[0].line,
                               d.positional[0].col)
        for child in children:
            _name(child)
        d.check_keys({"repeat"})
        repeat = 1
        if "repeat" in d.options:
            tok, value = d.options["repeat"]
            if not re.fullmatch(r"\d+", value) or int(value) < 1:
                raise NetlistError(f"repeat must be a positive integer, got '{value}'",
                                   tok.line, d.value_col("repeat"))
            repeat = int(value)
        self.decls[name] = _Decl(
            "cascade", d.positional[0], children,
            lambda *blocks: Cascade(tuple(blocks), repeat),
        )

    def do_top(self, toks):
        d = _Directive(toks)
        (tok,) = self.expect_positional(d, 1, "top <name>")
        d.check_keys(set())
        _name(tok)
        if self.top is not None:
            raise NetlistError(f"duplicate top (already set at line {self.top.line})",
                               d.head.line, d.head.col)
        self.top = tok

    def do_sweep(self, toks):
        d = _Directive(toks)
        lo, hi, n = self.expect_positional(d, 3, "sweep <f_lo> <f_hi> <n_points>")
        d.check_keys(set())
        f_lo = parse_quantity(lo.text, FREQUENCY_UNITS, "frequency", lo.line, lo.col)
        f_hi = parse_quantity(hi.text, FREQUENCY_UNITS, "frequency", hi.line, hi.col)
        if not re.fullmatch(r"\d+", n.text):
            raise NetlistError(f"point count must be an integer, got '{n.text}'", n.line, n.col)
        grid = _build_checked(lambda: FrequencyGrid(f_lo, f_hi, int(n.text)), d.head)
        self.runs.append(SweepRun(grid))

    def do_pulse(self, toks):
        d = _Directive(toks)
        self.expect_positional(d, 0, "pulse f0=<freq> sigma_f=<freq>")
        d.check_keys({"f0", "sigma_f"})
        f0 = d.quantity("f0", FREQUENCY_UNITS, "frequency")
        sigma = d.quantity("sigma_f", FREQUENCY_UNITS, "frequency")
        if not (f0 > 0 and sigma > 0):
            raise NetlistError("pulse f0 and sigma_f must be > 0", d.head.line, d.head.col)
        self.runs.append(PulseRun(f0, sigma))

    def _ref(self, d: _Directive, key: str) -> _Tok:
        tok, value = d.require(key)
        ref = _Tok(value, tok.line, d.value_col(key))
        _name(ref)
        return ref

    # resolution -----------------------------------------------------------

    def run(self, text: str) -> Netlist:
        handlers = {
            "model": self.do_model,
            "line": self.do_line,
            "trapper": self.do_trapper,
            "cascade": self.do_cascade,
            "top": self.do_top,
            "sweep": self.do_sweep,
            "pulse": self.do_pulse,
        }
        for toks in _tokenize(text):
            self.last_line = toks[0].line
            handler = handlers.get(toks[0].text)
            if handler is None:
                raise NetlistError(f"unknown directive '{toks[0].text}'", toks[0].line, toks[0].col)
            handler(toks)

        if self.top is None:
            raise NetlistError("no top block", self.last_line, 1)

        blocks: dict[str, object] = {}
        refs: dict[str, tuple[str, ...]] = {}
        for name, decl in self.decls.items():
            refs[name] = tuple(t.text for t in decl.refs)
            blocks[name] = self._resolve(name, blocks, ())
        if self.top.text not in self.decls:
            what = "a model, not a block" if self.top.text in self.models else "unresolved reference"
            raise NetlistError(f"top '{self.top.text}': {what}", self.top.line, self.top.col)
        return Netlist(self.models, blocks, self.top.text, self.runs, refs)

    def _resolve(self, name: str, done: dict, stack: tuple):
        if name in done:
            return done[name]
        decl = self.decls[name]
        args = []
        for ref in decl.refs:
            if decl.kind == "cascade":
                if ref.text in stack or ref.text == name:
                    raise NetlistError(f"cycle through '{ref.text}'", ref.line, ref.col)
                if ref.text not in self.decls:
                    what = "a model, not a block" if ref.text in self.models else "unresolved reference"
                    raise NetlistError(f"'{ref.text}': {what}", ref.line, ref.col)
                args.append(self._resolve(ref.text, done, stack + (name,)))
            else:
                if ref.text not in self.models:
                    what = "a block, not a model" if ref.text in self.decls else "unresolved reference"
                    raise NetlistError(f"'{ref.text}': {what}", ref.line, ref.col)
                args.append(self.models[ref.text])
        block = _build_checked(lambda: decl.build(*args), decl.name_tok)
        done[name] = block
        return block


def parse(text: str, path: str | None = None) -> Netlist:
    try:
        return _Parser(path).run(text)
    except NetlistError as exc:
        exc.path = path
        raise


def parse_file(path) -> Netlist:
    with open(path, encoding="utf-8") as fp:
        text = fp.read()
    return parse(text, str(path))


def _len(x: float) -> str:
    return f"{x!r}m"


def _freq(x: float) -> str:
    return f"{x!r}Hz"


def serialize(netlist: Netlist) -> str:
    """Canonical text (SI units) that parses back to an equal Netlist."""
    out = []
    for name, model in netlist.models.items():
        if model.is_waveguide:
            out.append(f"model {name} waveguide a={_len(model.width_a)} er={model.eps_r!r} "
                       f"tand={model.tan_delta!r}")
        else:
            out.append(f"model {name} tem er={model.eps_r!r} tand={model.tan_delta!r}")
    for name, block in netlist.blocks.items():
        refs = netlist.refs[name]
        if isinstance(block, Line):
            out.append(f"line {name} model={refs[0]} L={_len(block.length)}")
        elif isinstance(block, Trapper):
            parts = [f"trapper {name} model={refs[0]} L1={_len(block.L1)}"]
            if block.mode is JunctionMode.UNITARY:
                parts.append("mode=unitary")
            parts += [f"loop k={lp.k!r} L2={_len(lp.L2)}" for lp in block.loops]
            out.append(" ".join(parts))
        else:
            out.append(f"cascade {name} {' '.join(refs)} repeat={block.repeat}")
    out.append(f"top {netlist.top}")
    for run in netlist.runs:
        if isinstance(run, SweepRun):
            g = run.grid
            out.append(f"sweep {_freq(g.f_start)} {_freq(g.f_stop)} {g.n_points}")
        else:
            out.append(f"pulse f0={_freq(run.f0)} sigma_f={_freq(run.sigma_f)}")
    return "\n".join(out) + "\n"
