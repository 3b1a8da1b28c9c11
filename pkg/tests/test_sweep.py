import asyncio
import csv
import io
import logging
import math

import pytest

from jointwitness.exceptions import InvalidInputError
from jointwitness.progress import SweepProgress
from jointwitness.services.sweep import (
    CSV_COLUMNS,
    SweepRow,
    evaluate_row,
    grid_values,
    run_sweep,
    write_sweep_csv,
)

SQRT3 = math.sqrt(3)


def test_grid_values():
    assert grid_values(4) == [0.25, 0.5, 0.75, 1.0]
    with pytest.raises(InvalidInputError):
        grid_values(0)


def test_evaluate_row_known_values():
    row = evaluate_row(1.0, 1.0, with_lp=False)
    assert row.nonclassical
    assert row.min_entry == pytest.approx(-0.1830127, abs=1e-7)
    assert row.lp_feasible is None

    row = evaluate_row(0.5, 1.0, with_lp=False)
    assert not row.nonclassical
    assert row.min_entry == pytest.approx(0.0334936, abs=1e-7)

    row = evaluate_row(0.5, SQRT3 / 2, with_lp=False)
    assert abs(row.min_entry) < 1e-12
    assert not row.nonclassical
    assert row.ratio == pytest.approx(1.0)


def test_evaluate_row_with_lp():
    row = evaluate_row(1.0, 1.0)
    assert row.lp_feasible is False
    assert row.lp_regime == "nonseparable by negativity"

    row = evaluate_row(0.1, 1.0)
    assert row.lp_feasible is True
    assert row.lp_regime == "separable"

    row = evaluate_row(0.0, 0.5)
    assert row.lp_feasible is True
    assert row.min_entry == pytest.approx(0.25)


def test_sweep_threshold_grid():
    values = [k / 100 for k in range(1, 101)]
    rows = asyncio.run(run_sweep(values, values, with_lp=False, workers=8))
    assert len(rows) == 10_000
    assert [(r.s_norm, r.eta) for r in rows] == sorted((r.s_norm, r.eta) for r in rows)
    for row in rows:
        assert row.nonclassical == (SQRT3 * row.s_norm > row.eta), (row.s_norm, row.eta)


def test_sweep_orders_and_deduplicates():
    rows = asyncio.run(run_sweep([1.0, 0.2, 1.0], [1.0, 0.5], with_lp=True, workers=2))
    assert [(r.s_norm, r.eta) for r in rows] == [(0.2, 0.5), (0.2, 1.0), (1.0, 0.5), (1.0, 1.0)]
    verdicts = {(r.s_norm, r.eta): r.lp_regime for r in rows}
    assert verdicts[(0.2, 1.0)] == "separable"
    assert verdicts[(1.0, 1.0)] == "nonseparable by negativity"
    assert verdicts[(0.2, 0.5)] == "nonseparable beyond the sufficient condition"


def test_sweep_rejects_bad_values():
    with pytest.raises(InvalidInputError):
        asyncio.run(run_sweep([0.5, 1.2], [1.0], with_lp=False))
    with pytest.raises(InvalidInputError):
        asyncio.run(run_sweep([0.5], [0.0], with_lp=False))
    with pytest.raises(InvalidInputError):
        asyncio.run(run_sweep([], [1.0], with_lp=False))


def test_write_sweep_csv():
    rows = [
        SweepRow(s_norm=0.5, eta=1.0, ratio=0.8660254037844386, min_entry=0.03349364905389035, nonclassical=False),
        SweepRow(s_norm=1.0, eta=1.0, ratio=1.7320508075688772, min_entry=-0.18301270189221933,
                 nonclassical=True, lp_feasible=False, lp_regime="nonseparable by negativity"),
    ]
    buffer = io.StringIO()
    write_sweep_csv(rows, buffer)

    lines = buffer.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[1] == "0.5,1.0,0.8660254037844386,0.03349364905389035,false,,"

    parsed = list(csv.DictReader(io.StringIO(buffer.getvalue())))
    assert parsed[1]["nonclassical"] == "true"
    assert parsed[1]["lp_feasible"] == "false"
    assert float(parsed[1]["min_entry"]) == -0.18301270189221933


def test_progress_tracking():
    progress = SweepProgress()
    progress.start(3)
    progress.update(0.5, 1.0, nonclassical=False, separable=True)
    progress.update(1.0, 1.0, nonclassical=True, separable=False)
    assert progress.is_running
    assert progress.fraction == pytest.approx(2 / 3)
    assert progress.nonclassical_count == 1
    assert progress.separable_count == 1

    progress.finish()
    state = progress.to_dict()
    assert state["is_running"] is False
    assert state["completed_count"] == 2
    assert state["finished_at"] is not None


def test_sweep_logs_progress(caplog):
    values = [k / 25 for k in range(1, 26)]
    with caplog.at_level(logging.DEBUG, logger="jointwitness.services.sweep"):
        asyncio.run(run_sweep(values, values, with_lp=False, workers=4))

    messages = [record.getMessage() for record in caplog.records]
    assert "  500/625 rows done (80%)" in messages
    assert any(m.startswith("Sweep complete:") and m.endswith("of 625") for m in messages)
    state = next(m for m in messages if m.startswith("Sweep state:"))
    assert "'completed_count': 625" in state
    assert "'is_running': False" in state
