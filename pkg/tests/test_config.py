# -*- encoding: utf-8 -*-

import logging

import pytest

from linslam.config import LOG_LEVEL_VARIABLE, configure_logging, load_config, resolve_level
from linslam.errors import InvalidInput

def test_verbosity_flags_win(monkeypatch):
    monkeypatch.setenv(LOG_LEVEL_VARIABLE, "ERROR")
    assert resolve_level(1) == logging.INFO
    assert resolve_level(3) == logging.DEBUG
    assert resolve_level(0) == logging.ERROR


def test_level_from_environment(monkeypatch):
    monkeypatch.delenv(LOG_LEVEL_VARIABLE, raising = False)
    assert resolve_level() == logging.WARNING

    monkeypatch.setenv(LOG_LEVEL_VARIABLE, "debug")
    assert resolve_level() == logging.DEBUG

    monkeypatch.setenv(LOG_LEVEL_VARIABLE, "15")
    assert resolve_level() == 15

    monkeypatch.setenv(LOG_LEVEL_VARIABLE, "chatty")
    with pytest.raises(InvalidInput):
        resolve_level()


def test_configure_logging_keeps_a_single_handler():
    configure_logging(logging.INFO)
    logger = configure_logging(logging.DEBUG)

    ours = [handler for handler in logger.handlers if getattr(handler, "_linslam", False)]
    assert len(ours) == 1
    assert logger.level == logging.DEBUG


def test_load_config(tmp_path):
    path = tmp_path / "linslam.yaml"
    path.write_text("strategy: dc\nthreads: 4\nmax-iters: 30\n")
    assert load_config(str(path)) == {"strategy" : "dc", "threads" : 4, "max_iters" : 30}

    path.write_text("")
    assert load_config(str(path)) == {}

    path.write_text("- dc\n- seq\n")
    with pytest.raises(InvalidInput):
        load_config(str(path))

    path.write_text("strategy: [dc\n")
    with pytest.raises(InvalidInput):
        load_config(str(path))
