from __future__ import annotations

import logging

import pytest

from graphlog.workers import ENV_THREADS, map_ordered, worker_count


def test_results_keep_input_order(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(ENV_THREADS, "4")
    assert worker_count() == 4
    assert map_ordered(lambda x: x * x, range(50)) == [x * x for x in range(50)]


def test_invalid_thread_count_falls_back_to_one(
    monkeypatch: pytest.MonkeyPatch, caplog: pytest.LogCaptureFixture
) -> None:
    monkeypatch.setenv(ENV_THREADS, "many")
    with caplog.at_level(logging.WARNING):
        assert worker_count() == 1
    assert ENV_THREADS in caplog.text


def test_unset_means_one_worker(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv(ENV_THREADS, raising=False)
    assert worker_count() == 1
    assert map_ordered(str, []) == []
