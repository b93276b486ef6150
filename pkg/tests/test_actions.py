import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hrlgym.actions import (
    Action,
    ActionRegistry,
    MacroAction,
    META_STOP,
    N_ACTIONS,
    all_actions,
    flatten,
    format_action,
    grid_coords,
    mouse_distance,
    parse_action,
    unflatten,
)
from hrlgym.errors import ParseError, RangeError


class TestRegistry:
    def test_cardinalities(self, registry):
        assert len(registry.key_names) == 92
        assert len(registry.hotkey_names) == 78
        assert len(registry.meta_names) == 4
        assert len(registry.interaction_names) == 8

    def test_names_unique(self, registry):
        for names in (registry.key_names, registry.hotkey_names,
                      registry.meta_names, registry.interaction_names):
            assert len(set(names)) == len(names)

    def test_required_names_present(self, registry):
        for key in ("a", "k", "esc", "enter", "space"):
            assert key in registry.key_names
        for combo in ("ctrl+c", "alt+tab", "ctrl+x", "shift+x", "cmd+x"):
            assert combo in registry.hotkey_names
        for inter in ("left_press", "left_release", "scroll_release"):
            assert inter in registry.interaction_names
        assert registry.meta_names == ["start", "stop", "wait", "text_input"]

    def test_lookup_inverse_of_index(self, registry):
        for i, name in enumerate(registry.key_names):
            assert registry.key_index(name) == i
        for i, name in enumerate(registry.hotkey_names):
            assert registry.hotkey_index(name) == i

    def test_unknown_names_raise(self, registry):
        with pytest.raises(ParseError):
            registry.key_index("no_such_key")
        with pytest.raises(ParseError):
            registry.hotkey_index("ctrl+nothing")

    def test_save_load_round_trip(self, registry, tmp_path):
        path = tmp_path / "registry.txt"
        registry.save(path)
        again = ActionRegistry.load(path)
        assert again.key_names == registry.key_names
        assert again.hotkey_names == registry.hotkey_names
        assert again.meta_names == registry.meta_names
        assert again.interaction_names == registry.interaction_names

    def test_bad_section_counts_rejected(self):
        with pytest.raises(ParseError):
            ActionRegistry(["a"], ["ctrl+c"], ["start", "stop", "wait", "text_input"],
                           ["left_press"] * 8)


class TestParseFormat:
    def test_parse_single_key(self, registry):
        action = parse_action("single:a", registry)
        assert action == Action(MacroAction.SINGLE_KEY, registry.key_index("a"))

    def test_parse_mouse(self, registry):
        action = parse_action("mouse:1:2:left_press", registry)
        assert action.macro is MacroAction.MOUSE
        assert action.content == (1, 2, registry.interaction_index("left_press"))

    def test_region_out_of_range(self, registry):
        with pytest.raises(RangeError):
            parse_action("mouse:9:0:left_press", registry)

    def test_unknown_name(self, registry):
        with pytest.raises(ParseError):
            parse_action("single:definitely_not_a_key", registry)
        with pytest.raises(ParseError):
            parse_action("meta:go", registry)

    def test_malformed_text(self, registry):
        for text in ("single", "mouse:1:2", "clicks:1", "mouse:x:2:left_press"):
            with pytest.raises((ParseError, RangeError)):
                parse_action(text, registry)

    def test_format_meta_stop(self, registry):
        assert format_action(Action(MacroAction.META, META_STOP), registry) == "meta:stop"

    def test_format_mouse(self, registry):
        idx = registry.interaction_index("scroll_release")
        assert format_action(Action(MacroAction.MOUSE, (3, 6, idx)),
                             registry) == "mouse:3:6:scroll_release"

    def test_round_trip_every_action(self, registry):
        for action in all_actions():
            assert parse_action(format_action(action, registry), registry) == action

    @given(st.integers(min_value=0, max_value=N_ACTIONS - 1))
    def test_round_trip_property(self, index):
        registry = ActionRegistry.default()
        action = unflatten(index)
        assert parse_action(format_action(action, registry), registry) == action


class TestFlatten:
    def test_total_count(self):
        assert N_ACTIONS == 92 + 78 + 4 + 9 * 9 * 8 == 822

    def test_first_single_key_is_zero(self):
        assert flatten(Action(MacroAction.SINGLE_KEY, 0)) == 0

    def test_bijection(self):
        seen = set()
        for i in range(N_ACTIONS):
            action = unflatten(i)
            assert flatten(action) == i
            seen.add(action)
        assert len(seen) == N_ACTIONS

    def test_ordering_sections(self):
        assert unflatten(91).macro is MacroAction.SINGLE_KEY
        assert unflatten(92).macro is MacroAction.HOTKEY
        assert unflatten(169).macro is MacroAction.HOTKEY
        assert unflatten(170).macro is MacroAction.META
        assert unflatten(174).macro is MacroAction.MOUSE
        assert unflatten(174).content == (0, 0, 0)
        assert unflatten(175).content == (0, 0, 1)
        assert unflatten(174 + 8).content == (0, 1, 0)
        assert unflatten(174 + 72).content == (1, 0, 0)

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            unflatten(822)
        with pytest.raises(RangeError):
            unflatten(-1)

    def test_invalid_contents_rejected(self):
        with pytest.raises(RangeError):
            Action(MacroAction.SINGLE_KEY, 92)
        with pytest.raises(RangeError):
            Action(MacroAction.MOUSE, (9, 0, 0))
        with pytest.raises(RangeError):
            Action(MacroAction.MOUSE, (0, 0, 8))
        with pytest.raises(RangeError):
            Action(MacroAction.META, (1, 2, 3))


class TestGrid:
    def test_corners(self):
        assert grid_coords(0, 0) == (0, 0)
        assert grid_coords(8, 8) == (8, 8)

    def test_center(self):
        assert grid_coords(4, 4) == (4, 4)

    def test_injective_over_81_pairs(self):
        coords = {grid_coords(r, s) for r in range(9) for s in range(9)}
        assert len(coords) == 81
        assert coords == {(x, y) for x in range(9) for y in range(9)}

    def test_out_of_range(self):
        with pytest.raises(RangeError):
            grid_coords(9, 0)
        with pytest.raises(RangeError):
            grid_coords(0, -1)


class TestMouseDistance:
    def test_identity(self):
        assert mouse_distance((3, 5), (3, 5)) == 0.0

    def test_adjacent_fine_cells(self):
        assert mouse_distance((0, 0), (0, 1)) == 1.0

    def test_symmetric(self, rng):
        for _ in range(50):
            a = (int(rng.integers(9)), int(rng.integers(9)))
            b = (int(rng.integers(9)), int(rng.integers(9)))
            assert mouse_distance(a, b) == mouse_distance(b, a)
            assert mouse_distance(a, b) >= 0.0
            assert (mouse_distance(a, b) == 0.0) == (a == b)

    def test_matches_direct_recomputation(self, rng):
        for _ in range(100):
            a = (int(rng.integers(9)), int(rng.integers(9)))
            b = (int(rng.integers(9)), int(rng.integers(9)))
            ax, ay = grid_coords(*a)
            bx, by = grid_coords(*b)
            assert mouse_distance(a, b) == pytest.approx(
                math.sqrt((ax - bx) ** 2 + (ay - by) ** 2), abs=1e-12)

    def test_triangle_inequality(self, rng):
        for _ in range(200):
            pts = [(int(rng.integers(9)), int(rng.integers(9))) for _ in range(3)]
            a, b, c = pts
            assert mouse_distance(a, c) <= mouse_distance(a, b) + mouse_distance(b, c) + 1e-12
