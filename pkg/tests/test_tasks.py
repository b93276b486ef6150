import pytest

from hrlgym.actions import Action, MacroAction, META_STOP, META_WAIT, format_action
from hrlgym.errors import SchemaError
from hrlgym.tasks import (
    Difficulty,
    Task,
    TaskSuite,
    classify_difficulty,
    generate_synthetic_suite,
    load_suite,
    save_suite,
    validate_suite_file,
    validate_task,
)

STOP = Action(MacroAction.META, META_STOP)
WAIT = Action(MacroAction.META, META_WAIT)


def key(i):
    return Action(MacroAction.SINGLE_KEY, i)


def task_of_length(n, task_id=0):
    return Task(task_id, f"len {n}", tuple(key(i % 92) for i in range(n - 1)) + (STOP,))


class TestDifficulty:
    def test_boundary_seven_is_simple(self):
        assert classify_difficulty(task_of_length(7)) is Difficulty.SIMPLE

    def test_boundary_eight_is_hard(self):
        assert classify_difficulty(task_of_length(8)) is Difficulty.HARD

    def test_minimum_task_is_simple(self):
        assert classify_difficulty(task_of_length(2)) is Difficulty.SIMPLE


class TestGeneration:
    def test_default_counts(self, default_suite):
        assert len(default_suite) == 135
        assert default_suite.n_simple == 90
        assert default_suite.n_hard == 45

    def test_deterministic(self, registry, tmp_path):
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        save_suite(generate_synthetic_suite(3, 12, 6, registry), a, registry)
        save_suite(generate_synthetic_suite(3, 12, 6, registry), b, registry)
        assert a.read_bytes() == b.read_bytes()

    def test_empty_suite(self, registry):
        suite = generate_synthetic_suite(0, 0, 0, registry)
        assert len(suite) == 0

    def test_length_bounds(self, default_suite):
        for task in default_suite:
            if task.difficulty is Difficulty.SIMPLE:
                assert 2 <= len(task) <= 7
            else:
                assert 8 <= len(task) <= 20

    def test_terminal_stop_and_no_immediate_repeats(self, default_suite):
        for task in default_suite:
            assert task.actions[-1] == STOP
            for a, b in zip(task.actions, task.actions[1:]):
                assert a != b

    def test_all_generated_tasks_validate(self, default_suite, registry):
        for task in default_suite:
            report = validate_task(task, registry)
            assert report.ok, report.issues

    def test_ids_contiguous(self, default_suite):
        assert [t.id for t in default_suite] == list(range(135))


class TestSuiteFile:
    def test_round_trip(self, registry, small_suite, tmp_path):
        path = tmp_path / "suite.txt"
        save_suite(small_suite, path, registry)
        loaded = load_suite(path, registry)
        assert len(loaded) == len(small_suite)
        for a, b in zip(loaded, small_suite):
            assert a.id == b.id
            assert a.description == b.description
            assert a.actions == b.actions

    def test_duplicate_ids_rejected(self, registry, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("task 0\ndesc one\nact single:a\nact meta:stop\n\n"
                        "task 0\ndesc two\nact single:b\nact meta:stop\n")
        with pytest.raises(SchemaError):
            load_suite(path, registry)

    def test_length_one_rejected(self, registry, tmp_path):
        path = tmp_path / "short.txt"
        path.write_text("task 0\ndesc s\nact meta:stop\n")
        with pytest.raises(SchemaError):
            load_suite(path, registry)

    def test_missing_stop_rejected(self, registry, tmp_path):
        path = tmp_path / "nostop.txt"
        path.write_text("task 0\ndesc s\nact single:a\nact single:b\n")
        with pytest.raises(SchemaError):
            load_suite(path, registry)

    def test_bad_action_reports_line_number(self, registry, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("task 0\ndesc s\nact single:zzz_bogus\nact meta:stop\n")
        with pytest.raises(SchemaError, match="line 3"):
            load_suite(path, registry)

    def test_noncontiguous_ids_rejected(self, registry, tmp_path):
        path = tmp_path / "gap.txt"
        path.write_text("task 1\ndesc s\nact single:a\nact meta:stop\n")
        with pytest.raises(SchemaError):
            load_suite(path, registry)

    def test_lenient_validation_reports_step(self, registry, tmp_path):
        path = tmp_path / "lenient.txt"
        path.write_text("task 0\ndesc ok\nact single:a\nact meta:stop\n\n"
                        "task 1\ndesc bad\nact hot:ctrl+bogus\nact meta:stop\n")
        reports = validate_suite_file(path, registry)
        assert reports[0].ok
        assert not reports[1].ok
        assert "step 0" in reports[1].issues[0]


class TestValidateTask:
    def test_well_formed(self, registry):
        assert validate_task(task_of_length(5), registry).ok

    def test_missing_terminal_stop(self, registry):
        task = Task(0, "x", (key(0), key(1)))
        report = validate_task(task, registry)
        assert any("no terminal stop" in issue for issue in report.issues)

    def test_mid_sequence_stop_fails_replay(self, registry):
        task = Task(0, "x", (key(0), STOP, key(1), STOP))
        report = validate_task(task, registry)
        assert not report.ok

    def test_too_short(self, registry):
        report = validate_task(Task(0, "x", (STOP,)), registry)
        assert not report.ok


class TestTaskSuite:
    def test_by_difficulty_partition(self, default_suite):
        simple = default_suite.by_difficulty(Difficulty.SIMPLE)
        hard = default_suite.by_difficulty(Difficulty.HARD)
        assert len(simple) + len(hard) == len(default_suite)

    def test_bad_ids_raise(self):
        with pytest.raises(SchemaError):
            TaskSuite([task_of_length(3, task_id=5)])
