"""Hierarchical action vocabulary, text grammar, flat index maps, mouse grid.

Every agent action is a (macro, content) pair.  The four macro modes and
their content spaces are:

    single   one of 92 named keyboard keys
    hot      one of 78 named key combinations
    meta     one of 4 control signals (start / stop / wait / text_input)
    mouse    a (region, subregion, interaction) triple from 9 x 9 x 8

The canonical text grammar (case-sensitive, colon-delimited):

    single:<key> | hot:<combo> | meta:<name> | mouse:<r>:<s>:<interaction>

The flat index layout packs all 822 actions into [0, 822):

    [0,   92)   single keys, registry order
    [92, 170)   hotkeys, registry order
    [170,174)   meta signals
    [174,822)   mouse triples, row-major over (region, subregion, interaction)

Mouse geometry: a region selects a 3x3 coarse cell of the screen and a
subregion selects a 3x3 fine cell inside it, composing a 9x9 grid.  Distances
between mouse targets are Euclidean on that composed grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .errors import ParseError, RangeError

N_SINGLE = 92
N_HOT = 78
N_META = 4
N_REGIONS = 9
N_SUBREGIONS = 9
N_INTERACTIONS = 8
N_MOUSE = N_REGIONS * N_SUBREGIONS * N_INTERACTIONS
N_ACTIONS = N_SINGLE + N_HOT + N_META + N_MOUSE  # 822

META_START = 0
META_STOP = 1
META_WAIT = 2
META_TEXT_INPUT = 3


class MacroAction(Enum):
    """The four high-level action modes."""

    SINGLE_KEY = "single"
    HOTKEY = "hot"
    META = "meta"
    MOUSE = "mouse"


_CONTENT_SIZES = {
    MacroAction.SINGLE_KEY: N_SINGLE,
    MacroAction.HOTKEY: N_HOT,
    MacroAction.META: N_META,
}


@dataclass(frozen=True)
class Action:
    """One concrete action: a macro mode plus its content.

    ``content`` is an int index for single/hot/meta macros and a
    (region, subregion, interaction) int triple for the mouse macro.
    """

    macro: MacroAction
    content: int | tuple[int, int, int]

    def __post_init__(self):
        if self.macro is MacroAction.MOUSE:
            if not (isinstance(self.content, tuple) and len(self.content) == 3):
                raise RangeError(f"mouse content must be a triple, got {self.content!r}")
            r, s, i = self.content
            if not (0 <= r < N_REGIONS and 0 <= s < N_SUBREGIONS and 0 <= i < N_INTERACTIONS):
                raise RangeError(f"mouse triple out of range: {self.content!r}")
        else:
            if not isinstance(self.content, int):
                raise RangeError(f"{self.macro.value} content must be an int, got {self.content!r}")
            if not 0 <= self.content < _CONTENT_SIZES[self.macro]:
                raise RangeError(
                    f"{self.macro.value} index {self.content} outside "
                    f"[0, {_CONTENT_SIZES[self.macro]})"
                )

    @property
    def is_stop(self) -> bool:
        return self.macro is MacroAction.META and self.content == META_STOP


class ActionRegistry:
    """Name tables for every content index, with bidirectional lookup."""

    def __init__(self, key_names, hotkey_names, meta_names, interaction_names):
        self.key_names = list(key_names)
        self.hotkey_names = list(hotkey_names)
        self.meta_names = list(meta_names)
        self.interaction_names = list(interaction_names)
        for names, want, label in (
            (self.key_names, N_SINGLE, "single"),
            (self.hotkey_names, N_HOT, "hot"),
            (self.meta_names, N_META, "meta"),
            (self.interaction_names, N_INTERACTIONS, "interaction"),
        ):
            if len(names) != want:
                raise ParseError(f"[{label}] section must list {want} names, got {len(names)}")
            if len(set(names)) != len(names):
                raise ParseError(f"[{label}] section contains duplicate names")
        self._key_index = {n: i for i, n in enumerate(self.key_names)}
        self._hot_index = {n: i for i, n in enumerate(self.hotkey_names)}
        self._meta_index = {n: i for i, n in enumerate(self.meta_names)}
        self._inter_index = {n: i for i, n in enumerate(self.interaction_names)}

    def key_index(self, name: str) -> int:
        try:
            return self._key_index[name]
        except KeyError:
            raise ParseError(f"unknown key name {name!r}") from None

    def hotkey_index(self, name: str) -> int:
        try:
            return self._hot_index[name]
        except KeyError:
            raise ParseError(f"unknown hotkey name {name!r}") from None

    def meta_index(self, name: str) -> int:
        try:
            return self._meta_index[name]
        except KeyError:
            raise ParseError(f"unknown meta name {name!r}") from None

    def interaction_index(self, name: str) -> int:
        try:
            return self._inter_index[name]
        except KeyError:
            raise ParseError(f"unknown interaction name {name!r}") from None

    @classmethod
    def from_text(cls, text: str) -> "ActionRegistry":
        """Parse the sectioned one-name-per-line registry format."""
        sections = {"single": [], "hot": [], "meta": [], "interaction": []}
        current = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1]
                if name not in sections:
                    raise ParseError(f"line {lineno}: unknown section [{name}]")
                current = name
                continue
            if current is None:
                raise ParseError(f"line {lineno}: name before any section header")
            sections[current].append(line)
        return cls(sections["single"], sections["hot"], sections["meta"], sections["interaction"])

    @classmethod
    def load(cls, path) -> "ActionRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for header, names in (
                ("single", self.key_names),
                ("hot", self.hotkey_names),
                ("meta", self.meta_names),
                ("interaction", self.interaction_names),
            ):
                fh.write(f"[{header}]\n")
                for n in names:
                    fh.write(n + "\n")

    @classmethod
    def default(cls) -> "ActionRegistry":
        text = resources.files("hrlgym.data").joinpath("registry_v1.txt").read_text("utf-8")
        return cls.from_text(text)


def parse_action(text: str, registry: ActionRegistry) -> Action:
    """Parse canonical action text into an Action."""
    head, sep, rest = text.partition(":")
    if not sep:
        raise ParseError(f"malformed action text {text!r}")
    if head == "single":
        return Action(MacroAction.SINGLE_KEY, registry.key_index(rest))
    if head == "hot":
        return Action(MacroAction.HOTKEY, registry.hotkey_index(rest))
    if head == "meta":
        return Action(MacroAction.META, registry.meta_index(rest))
    if head == "mouse":
        parts = rest.split(":")
        if len(parts) != 3:
            raise ParseError(f"mouse action needs r:s:interaction, got {text!r}")
        try:
            r, s = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer mouse coordinates in {text!r}") from None
        if not (0 <= r < N_REGIONS and 0 <= s < N_SUBREGIONS):
            raise RangeError(f"mouse coordinates out of [0, 9) in {text!r}")
        return Action(MacroAction.MOUSE, (r, s, registry.interaction_index(parts[2])))
    raise ParseError(f"unknown macro {head!r} in {text!r}")


def format_action(action: Action, registry: ActionRegistry) -> str:
    """Render an Action in the canonical text grammar (inverse of parse)."""
    if action.macro is MacroAction.SINGLE_KEY:
        return f"single:{registry.key_names[action.content]}"
    if action.macro is MacroAction.HOTKEY:
        return f"hot:{registry.hotkey_names[action.content]}"
    if action.macro is MacroAction.META:
        return f"meta:{registry.meta_names[action.content]}"
    r, s, i = action.content
    return f"mouse:{r}:{s}:{registry.interaction_names[i]}"


def flatten(action: Action) -> int:
    """Map an Action to its flat index in [0, 822)."""
    if action.macro is MacroAction.SINGLE_KEY:
        return action.content
    if action.macro is MacroAction.HOTKEY:
        return N_SINGLE + action.content
    if action.macro is MacroAction.META:
        return N_SINGLE + N_HOT + action.content
    r, s, i = action.content
    return N_SINGLE + N_HOT + N_META + (r * N_SUBREGIONS + s) * N_INTERACTIONS + i


def unflatten(index: int) -> Action:
    """Inverse of flatten."""
    if not 0 <= index < N_ACTIONS:
        raise RangeError(f"flat index {index} outside [0, {N_ACTIONS})")
    if index < N_SINGLE:
        return Action(MacroAction.SINGLE_KEY, index)
    index -= N_SINGLE
    if index < N_HOT:
        return Action(MacroAction.HOTKEY, index)
    index -= N_HOT
    if index < N_META:
        return Action(MacroAction.META, index)
    index -= N_META
    rs, i = divmod(index, N_INTERACTIONS)
    r, s = divmod(rs, N_SUBREGIONS)
    return Action(MacroAction.MOUSE, (r, s, i))


def all_actions():
    """All 822 actions in flat-index order."""
    return [unflatten(i) for i in range(N_ACTIONS)]


def grid_coords(region: int, subregion: int) -> tuple[int, int]:
    """Compose region (coarse 3x3 cell) and subregion (fine 3x3 cell) into 9x9 coords."""
    if not 0 <= region < N_REGIONS:
        raise RangeError(f"region {region} outside [0, 9)")
    if not 0 <= subregion < N_SUBREGIONS:
        raise RangeError(f"subregion {subregion} outside [0, 9)")
    rr, rc = divmod(region, 3)
    sr, sc = divmod(subregion, 3)
    return rr * 3 + sr, rc * 3 + sc


def mouse_distance(a: tuple[int, int], b: tuple[int, int]) -> float:
    """Euclidean distance between two (region, subregion) targets on the 9x9 grid."""
    ax, ay = grid_coords(a[0], a[1])
    bx, by = grid_coords(b[0], b[1])
    return math.hypot(ax - bx, ay - by)
