"""Network data model for uplink cells with strength-level (GDoF) channel descriptions.

A network is a set of cells, each with one receiver and several transmitters
(users).  Every link carries a nonnegative *strength level*: the high-SNR
exponent of the link power normalized by a nominal power ``P``.  All levels
are stored as exact rationals so that downstream region computations can use
exact arithmetic.

All types in this module are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

from .errors import NetworkSpecError

#: Number of decimal digits kept when turning a float into an exact rational.
RATIONALIZE_DIGITS = 9

Rational = Union[Fraction, int]


class User(NamedTuple):
    """A transmitter, identified by its cell and its in-cell slot (both 1-based)."""

    cell: int
    slot: int

    def __repr__(self) -> str:  # compact, e.g. u(1,2)
        return f"u({self.cell},{self.slot})"


#: A subnetwork is just the set of active users.
Subnetwork = frozenset


def rationalize(x, digits: int = RATIONALIZE_DIGITS) -> Fraction:
    """Convert a number to an exact rational, rounding floats at 10^-digits."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot rationalize non-finite value {x!r}")
        scale = 10**digits
        return Fraction(round(x * scale), scale)
    raise TypeError(f"cannot rationalize {type(x).__name__}")


@dataclass(frozen=True)
class NetworkSpec:
    """Cell/user topology plus the full strength-level matrix.

    ``alpha[(user, rx_cell)]`` is the level of the link from ``user`` to the
    receiver of ``rx_cell``.  Invariants enforced at construction:

    * all levels are >= 0 (negative inputs are clipped to 0 with a warning),
    * within each cell, users are labelled so direct levels are ascending
      (ties keep input order); the applied relabelling is recorded in
      ``slot_provenance``.
    """

    cells: int
    users_per_cell: tuple[int, ...]
    alpha_map: Mapping[tuple[User, int], Fraction]
    #: per cell, ``slot_provenance[i-1][s-1]`` is the input slot stored as slot ``s``
    slot_provenance: tuple[tuple[int, ...], ...] = field(default=None)

    @classmethod
    def from_alpha(
        cls,
        cells: int,
        users_per_cell: Sequence[int],
        alpha: Mapping[tuple[User, int], Rational],
    ) -> "NetworkSpec":
        """Validate, clip, sort and freeze a raw strength-level assignment."""
        if cells < 1:
            raise NetworkSpecError("network needs at least one cell")
        users_per_cell = tuple(int(n) for n in users_per_cell)
        if len(users_per_cell) != cells:
            raise NetworkSpecError(
                f"users_per_cell has {len(users_per_cell)} entries for {cells} cells"
            )
        if any(n < 1 for n in users_per_cell):
            raise NetworkSpecError("every cell needs at least one user")

        expected = {
            (User(k, l), i)
            for k in range(1, cells + 1)
            for l in range(1, users_per_cell[k - 1] + 1)
            for i in range(1, cells + 1)
        }
        cleaned: dict[tuple[User, int], Fraction] = {}
        for key, value in alpha.items():
            user, rx = key
            user = User(*user)
            if (user, rx) not in expected:
                raise NetworkSpecError(f"alpha entry for unknown link {user}->rx{rx}")
            v = rationalize(value)
            if v < 0:
                warnings.warn(
                    f"negative strength level {v} on link {user}->rx{rx} clipped to 0",
                    stacklevel=2,
                )
                v = Fraction(0)
            cleaned[(user, rx)] = v
        missing = expected - set(cleaned)
        if missing:
            key = min(missing)
            raise NetworkSpecError(
                f"missing alpha entry for link {key[0]}->rx{key[1]} "
                f"({len(missing)} missing in total)"
            )

        # Relabel slots so direct levels are ascending in every cell (stable).
        provenance = []
        sorted_alpha: dict[tuple[User, int], Fraction] = {}
        for k in range(1, cells + 1):
            slots = list(range(1, users_per_cell[k - 1] + 1))
            slots.sort(key=lambda l: cleaned[(User(k, l), k)])
            provenance.append(tuple(slots))
            for new_slot, old_slot in enumerate(slots, start=1):
                for i in range(1, cells + 1):
                    sorted_alpha[(User(k, new_slot), i)] = cleaned[(User(k, old_slot), i)]

        return cls(cells, users_per_cell, sorted_alpha, tuple(provenance))

    # -- accessors ---------------------------------------------------------

    def alpha(self, user: User, rx_cell: int) -> Fraction:
        """Strength level of the link from ``user`` to the receiver of ``rx_cell``."""
        return self.alpha_map[(user, rx_cell)]

    def direct(self, user: User) -> Fraction:
        return self.alpha_map[(user, user.cell)]

    @property
    def users(self) -> tuple[User, ...]:
        """All users, in canonical (cell, slot) order."""
        return tuple(
            User(k, l)
            for k in range(1, self.cells + 1)
            for l in range(1, self.users_per_cell[k - 1] + 1)
        )

    def users_in_cell(self, cell: int) -> tuple[User, ...]:
        return tuple(User(cell, l) for l in range(1, self.users_per_cell[cell - 1] + 1))

    @property
    def full_subnetwork(self) -> Subnetwork:
        return frozenset(self.users)

    def scaled(self, c: Rational) -> "NetworkSpec":
        """Network with every strength level multiplied by ``c`` (c > 0)."""
        c = Fraction(c)
        if c <= 0:
            raise ValueError("scale factor must be positive")
        scaled = {key: c * v for key, v in self.alpha_map.items()}
        return NetworkSpec(self.cells, self.users_per_cell, scaled, self.slot_provenance)

    def validate_subnetwork(self, s: Iterable[User]) -> Subnetwork:
        s = frozenset(User(*u) for u in s)
        unknown = s - set(self.users)
        if unknown:
            raise NetworkSpecError(f"subnetwork contains unknown users {sorted(unknown)}")
        return s


@dataclass(frozen=True)
class DecodingOrder:
    """One successive-decoding order per cell.

    ``per_cell[i-1]`` lists the slots of cell ``i`` by decode position:
    position 1 is decoded last, the final position is decoded (and cancelled)
    first.  For a subnetwork, each tuple ranges over the active slots of that
    cell only; cells with no active user carry an empty tuple.
    """

    per_cell: tuple[tuple[int, ...], ...]

    @classmethod
    def identity(cls, net: NetworkSpec, s: Subnetwork | None = None) -> "DecodingOrder":
        """The order with ascending slots in every cell (weakest decoded last)."""
        active = net.full_subnetwork if s is None else net.validate_subnetwork(s)
        return cls(
            tuple(
                tuple(l for l in range(1, net.users_per_cell[k - 1] + 1) if User(k, l) in active)
                for k in range(1, net.cells + 1)
            )
        )

    def slots(self, cell: int) -> tuple[int, ...]:
        return self.per_cell[cell - 1]

    def user_at(self, cell: int, position: int) -> User:
        """User of ``cell`` at 1-based decode position ``position``."""
        return User(cell, self.per_cell[cell - 1][position - 1])

    def active_users(self) -> frozenset:
        return frozenset(
            User(k, l) for k, slots in enumerate(self.per_cell, start=1) for l in slots
        )

    def validate(self, net: NetworkSpec, s: Subnetwork | None = None) -> None:
        active = net.full_subnetwork if s is None else net.validate_subnetwork(s)
        if len(self.per_cell) != net.cells:
            raise NetworkSpecError("decoding order has wrong number of cells")
        for k, slots in enumerate(self.per_cell, start=1):
            want = sorted(u.slot for u in active if u.cell == k)
            if sorted(slots) != want:
                raise NetworkSpecError(
                    f"decoding order for cell {k} is not a permutation of active slots {want}"
                )


def enumerate_orders(net: NetworkSpec, s: Subnetwork | None = None) -> Iterator[DecodingOrder]:
    """Yield the decoding orders of the subnetwork ``s``, each exactly once.

    Orders differing only on inactive users are not distinguished, so exactly
    prod_i |S_i|! orders are produced.  Deterministic order: per-cell
    permutations in lexicographic order, combined cell-by-cell.
    """
    active = net.full_subnetwork if s is None else net.validate_subnetwork(s)
    per_cell_perms = []
    for k in range(1, net.cells + 1):
        slots = sorted(u.slot for u in active if u.cell == k)
        per_cell_perms.append(list(itertools.permutations(slots)))
    for combo in itertools.product(*per_cell_perms):
        yield DecodingOrder(tuple(combo))


@dataclass(frozen=True)
class FiniteSnrSpec:
    """Finite-SNR channel description: nominal power, gains and power budgets.

    ``gains[(user, rx_cell)]`` is the complex (or magnitude) channel
    coefficient; ``tx_powers[user]`` the transmit power budget in linear
    scale.  ``nominal_power`` must exceed 1 so the level normalization is
    well defined.
    """

    nominal_power: float
    gains: Mapping[tuple[User, int], complex]
    tx_powers: Mapping[User, float]

    def link_power(self, user: User, rx_cell: int) -> float:
        """|h|^2 * P_tx of a link, the quantity whose exponent is the level."""
        h = self.gains[(user, rx_cell)]
        return abs(h) ** 2 * self.tx_powers[user]

    def clipped_link_power(self, user: User, rx_cell: int) -> float:
        return max(1.0, self.link_power(user, rx_cell))


def strength_levels(fs: FiniteSnrSpec) -> NetworkSpec:
    """Strength-level network of a finite-SNR description.

    Level of each link: log(max(1, |h|^2 P_tx)) / log(P), rationalized and
    slot-sorted.  Raises for P <= 1 (degenerate log base).
    """
    if fs.nominal_power <= 1:
        raise NetworkSpecError("nominal power must exceed 1")
    missing = {u for (u, _) in fs.gains} - set(fs.tx_powers)
    if missing:
        raise NetworkSpecError(f"no power budget for users {sorted(missing)}")
    cells = max(rx for (_, rx) in fs.gains)
    counts: dict[int, int] = {}
    for user in fs.tx_powers:
        counts[user.cell] = max(counts.get(user.cell, 0), user.slot)
    users_per_cell = [counts.get(k, 0) for k in range(1, cells + 1)]
    log_p = math.log(fs.nominal_power)
    alpha = {}
    for (user, rx), _ in fs.gains.items():
        level = math.log(fs.clipped_link_power(user, rx)) / log_p
        alpha[(user, rx)] = rationalize(level)
    return NetworkSpec.from_alpha(cells, users_per_cell, alpha)


def sort_finite_snr(fs: FiniteSnrSpec) -> tuple[NetworkSpec, FiniteSnrSpec]:
    """Return the level network plus ``fs`` re-labelled to match its slot order.

    Rate computations index users through the sorted network, so the
    finite-SNR maps must be permuted by the same relabelling.
    """
    net = strength_levels(fs)
    gains = {}
    powers = {}
    for k in range(1, net.cells + 1):
        for new_slot, old_slot in enumerate(net.slot_provenance[k - 1], start=1):
            old, new = User(k, old_slot), User(k, new_slot)
            powers[new] = fs.tx_powers[old]
            for i in range(1, net.cells + 1):
                gains[(new, i)] = fs.gains[(old, i)]
    return net, FiniteSnrSpec(fs.nominal_power, gains, powers)


# -- network files ----------------------------------------------------------


def _parse_link_records(records, what: str) -> dict:
    out = {}
    for idx, rec in enumerate(records):
        try:
            key = (User(int(rec["tx_cell"]), int(rec["tx_slot"])), int(rec["rx_cell"]))
            value = rec["value"]
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkSpecError(f"{what}[{idx}]: malformed record ({exc})") from exc
        if key in out:
            raise NetworkSpecError(f"{what}[{idx}]: duplicate entry for {key}")
        out[key] = value
    return out


def load_network(path) -> NetworkSpec:
    """Load and validate a network file (see docs/cli.md for the schema).

    Decimal literals in the file are parsed exactly as rationals.
    """
    path = Path(path)
    try:
        with path.open() as f:
            doc = json.load(f, parse_float=Fraction)
    except (OSError, json.JSONDecodeError) as exc:
        raise NetworkSpecError(f"{path}: cannot parse network file ({exc})") from exc
    return network_from_document(doc, where=str(path))


def network_from_document(doc: Mapping, where: str = "<document>") -> NetworkSpec:
    try:
        cells = int(doc["cells"])
        users_per_cell = [int(n) for n in doc["users_per_cell"]]
        alpha_records = doc["alpha"]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkSpecError(f"{where}: missing or malformed field ({exc})") from exc
    alpha = _parse_link_records(alpha_records, f"{where}:alpha")
    return NetworkSpec.from_alpha(cells, users_per_cell, alpha)


def load_finite_snr(path) -> FiniteSnrSpec:
    """Load the optional finite-SNR block of a network file."""
    path = Path(path)
    with path.open() as f:
        doc = json.load(f)
    block = doc.get("finite_snr")
    if block is None:
        raise NetworkSpecError(f"{path}: file has no finite_snr block")
    try:
        p = float(block["nominal_power"])
        gains_rec = block["gains"]
        power_rec = block["tx_powers"]
    except (KeyError, TypeError, ValueError) as exc:
        raise NetworkSpecError(f"{path}: malformed finite_snr block ({exc})") from exc

    def as_gain(v):
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        return complex(float(v), 0.0)

    gains = {k: as_gain(v) for k, v in _parse_link_records(gains_rec, "gains").items()}
    powers = {}
    for idx, rec in enumerate(power_rec):
        try:
            powers[User(int(rec["cell"]), int(rec["slot"]))] = float(rec["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkSpecError(f"{path}: tx_powers[{idx}] malformed ({exc})") from exc
    for user, p_tx in powers.items():
        if p_tx <= 0:
            raise NetworkSpecError(f"{path}: nonpositive power budget for {user}")
    return FiniteSnrSpec(p, gains, powers)
