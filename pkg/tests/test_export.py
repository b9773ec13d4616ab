import numpy as np
import orjson
import pytest

from ehmec.errors import InputError
from ehmec.experiments import GenParams, SweepSpec, export, means_from_rows, read_csv, run_sweep, to_csv
from ehmec.experiments.export import CSV_FIELDS


@pytest.fixture(scope="module")
def result():
    spec = SweepSpec(
        parameter="K",
        values=[1, 2],
        trials=2,
        num_slots=3,
        schemes=["proposed", "equal_energy"],
        solver={"max_iters": 2000},
    )
    return run_sweep(spec, GenParams(seed=9))


def test_csv_layout(result):
    lines = to_csv(result).decode().splitlines()
    assert lines[0] == ",".join(CSV_FIELDS)
    assert len(lines) == 1 + 2 * 2 * 2
    first = lines[1].split(",")
    assert lines[0].startswith("swept_value,scheme,trial,objective")
    assert first[:3] == ["1", "proposed", "0"]
    assert first[4] in ("true", "false")
    assert first[5] == "K"


def test_export_writes_both_files(result, tmp_path):
    csv_path, json_path = export(result, tmp_path / "out", stem="fig4")
    assert csv_path.name == "fig4.csv"
    assert json_path.name == "fig4.json"
    summary = orjson.loads(json_path.read_bytes())
    assert summary["parameter"] == "K"
    assert set(summary["schemes"]) == {"proposed", "equal_energy"}
    assert not list((tmp_path / "out").glob("*.tmp"))


def test_export_is_byte_identical(result, tmp_path):
    a, _ = export(result, tmp_path / "a")
    b, _ = export(result, tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()


def test_csv_reproduces_means(result, tmp_path):
    csv_path, _ = export(result, tmp_path)
    means = means_from_rows(read_csv(csv_path))
    for vi, value in enumerate(result.values):
        for si, scheme in enumerate(result.schemes):
            assert means[(value, scheme.value)] == pytest.approx(result.means()[vi, si], rel=1e-12)


def test_read_csv_rejects_foreign_files(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(InputError, match="unexpected columns"):
        read_csv(path)
    with pytest.raises(InputError, match="file not found"):
        read_csv(tmp_path / "missing.csv")


def test_means_from_rows_can_skip_nonconverged():
    rows = [
        {"swept_value": "1", "scheme": "proposed", "objective": "2.0", "converged": "true"},
        {"swept_value": "1", "scheme": "proposed", "objective": "4.0", "converged": "false"},
    ]
    assert means_from_rows(rows)[(1.0, "proposed")] == 3.0
    assert means_from_rows(rows, exclude_nonconverged=True)[(1.0, "proposed")] == 2.0
    assert np.isfinite(list(means_from_rows(rows).values())).all()
