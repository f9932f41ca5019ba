import numpy as np

from ncruelle import paper
from ncruelle.algebra import Algebra

ANCHORS = {"gg3", "gg6", "depo-iterate", "depo", "gg9", "or1-or2", "gg11", "gg13", "efen-i", "efen-ii",
           "prep-eq", "ok3-J", "ok3-p", "er2", "spi1", "ex:diagonals", "W-transform", "d=1"}


def test_every_fixture_passes():
    rows = paper.run_all()
    failed = [(r.anchor, r.residual) for r in rows if not r.passed]
    assert not failed


def test_one_row_per_anchor():
    rows = paper.run_all()
    assert [r.anchor for r in rows] == [f().anchor for f in paper.FIXTURES]
    assert set(r.anchor for r in rows) == ANCHORS
    assert len(rows) == len(ANCHORS)


def test_fault_injection_is_detected(monkeypatch):
    orig = Algebra.trace_functional
    monkeypatch.setattr(Algebra, "trace_functional", lambda self: -orig(self))
    rows = paper.run_all()
    assert sum(not r.passed for r in rows) >= 5


def test_crashing_fixture_becomes_failing_row(monkeypatch):
    def boom():
        raise RuntimeError("broken")
    monkeypatch.setattr(paper, "FIXTURES", (boom,))
    (row,) = paper.run_all()
    assert not row.passed and row.anchor == "boom" and np.isnan(row.observed)


def test_table_format():
    rows = paper.run_all()
    table = paper.format_table(rows)
    assert table.splitlines()[0].startswith("anchor")
    assert len(table.splitlines()) == len(rows) + 1
    assert all("residual" in r.to_json() for r in rows)
