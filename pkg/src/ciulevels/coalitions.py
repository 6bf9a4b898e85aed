"""Exact TU-game primitives over bitmask coalitions.

A coalition is a plain ``int`` whose bit ``i`` marks player ``i``.  A game
stores one worth per coalition in an array indexed by that bitmask, so set
algebra is integer arithmetic and every exhaustive scan is a numpy pass over
``2**n`` entries.  Everything here is exact enumeration; it doubles as the
brute-force oracle for the approximate machinery elsewhere in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

MAX_PLAYERS = 20
TOL = 1e-9

Coalition = int


class CapacityError(ValueError):
    """Raised when an exhaustive operation is asked to handle too many players."""


class IncompleteTableError(ValueError):
    pass


def coalition(members: Iterable[int]) -> Coalition:
    mask = 0
    for i in members:
        if i < 0:
            raise ValueError(f"negative player index {i}")
        mask |= 1 << i
    return mask


def members(mask: Coalition) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _check_capacity(n: int, limit: int = MAX_PLAYERS) -> None:
    if n < 0:
        raise ValueError("number of players must be non-negative")
    if n > limit:
        raise CapacityError(f"{n} players exceeds the exhaustive limit of {limit}")


def popcounts(n: int) -> np.ndarray:
    """Cardinality of every coalition of an ``n``-player game."""
    sizes = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        bit = 1 << i
        sizes[bit : 2 * bit] = sizes[:bit] + 1
    return sizes


@dataclass(frozen=True, eq=False)
class Game:
    """Characteristic function ``v`` with ``v(empty) == 0``."""

    n_players: int
    worth: np.ndarray

    def __post_init__(self):
        _check_capacity(self.n_players)
        w = np.array(self.worth, dtype=float)
        if w.shape != (1 << self.n_players,):
            raise ValueError(
                f"expected {1 << self.n_players} worths for {self.n_players} players, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("worths must be finite")
        if w[0] != 0.0:
            raise ValueError("worth of the empty coalition must be 0")
        w.setflags(write=False)
        object.__setattr__(self, "worth", w)

    @classmethod
    def from_function(cls, n: int, fn) -> "Game":
        """Tabulate ``fn(frozenset_of_players)`` over all coalitions."""
        _check_capacity(n)
        w = [0.0] + [float(fn(frozenset(members(m)))) for m in range(1, 1 << n)]
        return cls(n, np.array(w))

    @property
    def grand(self) -> Coalition:
        return (1 << self.n_players) - 1

    def __call__(self, s: Coalition | Iterable[int]) -> float:
        if not isinstance(s, (int, np.integer)):
            s = coalition(s)
        return float(self.worth[s])

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return self.n_players == other.n_players and np.array_equal(self.worth, other.worth)

    def isclose(self, other: "Game", tol: float = TOL) -> bool:
        return self.n_players == other.n_players and bool(
            np.all(np.abs(self.worth - other.worth) <= tol)
        )

    def __add__(self, other: "Game") -> "Game":
        if self.n_players != other.n_players:
            raise ValueError("games have different player counts")
        return Game(self.n_players, self.worth + other.worth)

    def scale(self, alpha: float) -> "Game":
        return Game(self.n_players, alpha * self.worth)


def unanimity_game(t: Coalition | Iterable[int], n: int) -> Game:
    if not isinstance(t, (int, np.integer)):
        t = coalition(t)
    t = int(t)
    if t == 0:
        raise ValueError("unanimity game needs a nonempty carrier coalition")
    if t >> n:
        raise ValueError(f"carrier {members(t)} is not a subset of {n} players")
    _check_capacity(n)
    masks = np.arange(1 << n)
    return Game(n, ((masks & t) == t).astype(float))


@dataclass(frozen=True, eq=False)
class DividendTable:
    """Harsanyi dividends indexed by bitmask; entry 0 is unused and held at 0."""

    n_players: int
    dividends: np.ndarray

    def __post_init__(self):
        _check_capacity(self.n_players)
        d = np.array(self.dividends, dtype=float)
        if d.shape != (1 << self.n_players,):
            raise IncompleteTableError(
                f"expected {1 << self.n_players} entries, got shape {d.shape}"
            )
        missing = [m for m in range(1, d.size) if not np.isfinite(d[m])]
        if missing:
            raise IncompleteTableError(
                f"no dividend for coalitions {[members(m) for m in missing[:5]]}"
            )
        d[0] = 0.0
        d.setflags(write=False)
        object.__setattr__(self, "dividends", d)

    @classmethod
    def from_mapping(cls, n: int, table: Mapping[Coalition, float]) -> "DividendTable":
        d = np.full(1 << n, np.nan)
        d[0] = 0.0
        for mask, value in table.items():
            d[int(mask)] = value
        return cls(n, d)

    def __getitem__(self, t: Coalition | Iterable[int]) -> float:
        if not isinstance(t, (int, np.integer)):
            t = coalition(t)
        if t == 0:
            raise KeyError("the empty coalition carries no dividend")
        return float(self.dividends[t])


def _moebius(values: np.ndarray, n: int, sign: float) -> np.ndarray:
    # in-place subset-sum transform; sign=-1 inverts the zeta transform
    out = values.copy()
    for i in range(n):
        bit = 1 << i
        view = out.reshape(-1, 2 * bit)
        view[:, bit:] += sign * view[:, :bit]
    return out


def harsanyi_dividends(g: Game) -> DividendTable:
    """Dividend of every coalition via fast Moebius inversion of ``v``."""
    return DividendTable(g.n_players, _moebius(g.worth, g.n_players, -1.0))


def reconstruct_from_dividends(d: DividendTable) -> Game:
    worth = _moebius(d.dividends, d.n_players, 1.0)
    worth[0] = 0.0
    return Game(d.n_players, worth)


@dataclass(frozen=True)
class PropertyReport:
    monotonic: bool
    zero_monotonic: bool
    superadditive: bool
    convex: bool
    nonnegative: bool


def game_properties(g: Game, tol: float = TOL) -> PropertyReport:
    n = g.n_players
    v = g.worth
    masks = np.arange(1 << n)
    monotonic = superadditive = convex = True
    for s in range(1 << n):
        vs = v[s]
        if monotonic:
            subs = masks[(masks & s) == masks]
            monotonic = bool(np.all(vs >= v[subs] - tol))
        if superadditive:
            disjoint = masks[(masks & s) == 0]
            superadditive = bool(np.all(v[s | disjoint] >= vs + v[disjoint] - tol))
        if convex:
            convex = bool(np.all(v[s | masks] + v[s & masks] >= vs + v - tol))
        if not (monotonic or superadditive or convex):
            break
    zero_monotonic = True
    for i in range(n):
        bit = 1 << i
        without = masks[(masks & bit) == 0]
        if np.any(v[without | bit] < v[without] + v[bit] - tol):
            zero_monotonic = False
            break
    return PropertyReport(
        monotonic=monotonic,
        zero_monotonic=zero_monotonic,
        superadditive=superadditive,
        convex=convex,
        nonnegative=bool(np.all(v >= -tol)),
    )


def _payoff(g: Game, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n_players,):
        raise ValueError(f"payoff vector has shape {x.shape}, game has {g.n_players} players")
    return x


def coalition_payoffs(x: np.ndarray) -> np.ndarray:
    """``x(S)`` for every coalition ``S``."""
    n = len(x)
    out = np.zeros(1 << n)
    for i in range(n):
        bit = 1 << i
        out[bit : 2 * bit] = out[:bit] + x[i]
    return out


def is_efficient(g: Game, x, tol: float = TOL) -> bool:
    x = _payoff(g, x)
    return abs(float(x.sum()) - g.worth[g.grand]) <= tol


def is_imputation(g: Game, x, tol: float = TOL) -> bool:
    x = _payoff(g, x)
    singles = g.worth[[1 << i for i in range(g.n_players)]]
    return is_efficient(g, x, tol) and bool(np.all(x >= singles - tol))


def in_core(g: Game, x, tol: float = TOL) -> bool:
    x = _payoff(g, x)
    return is_efficient(g, x, tol) and bool(np.all(coalition_payoffs(x) >= g.worth - tol))


@dataclass(frozen=True)
class AxiomReport:
    efficiency_sum: bool
    additivity: bool


def check_value_axioms(g: Game, tol: float = TOL) -> AxiomReport:
    """Efficiency here is the literal grand-worth-equals-sum-over-all-coalitions
    condition; standard efficiency of a payoff vector lives in ``is_efficient``."""
    v = g.worth
    efficiency_sum = abs(v[g.grand] - v.sum()) <= tol
    masks = np.arange(1 << g.n_players)
    additivity = True
    for s in range(1 << g.n_players):
        t = masks[(masks & s) == 0]
        if np.any(np.abs(v[s | t] - v[s] - v[t]) > tol):
            additivity = False
            break
    return AxiomReport(efficiency_sum=bool(efficiency_sum), additivity=additivity)


def dump_game(g: Game) -> str:
    width = max(1, (g.n_players + 3) // 4)
    lines = [f"n_players={g.n_players}"]
    lines += [f"{m:0{width}x} {float(g.worth[m])!r}" for m in range(1 << g.n_players)]
    return "\n".join(lines) + "\n"


def load_game(text: str) -> Game:
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows or not rows[0].startswith("n_players="):
        raise ValueError("game file must start with 'n_players=<n>'")
    n = int(rows[0].split("=", 1)[1])
    _check_capacity(n)
    worth = np.full(1 << n, np.nan)
    for lineno, row in enumerate(rows[1:], start=2):
        parts = row.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'bitmask_hex value', got {row!r}")
        mask = int(parts[0], 16)
        if mask >= worth.size:
            raise ValueError(f"line {lineno}: coalition {parts[0]} outside {n} players")
        worth[mask] = float(parts[1])
    if np.isnan(worth).any():
        missing = int(np.flatnonzero(np.isnan(worth))[0])
        raise ValueError(f"game file has no worth for coalition {missing:x}")
    return Game(n, worth)
