from __future__ import annotations

import json
from fractions import Fraction

import pytest

from flagcount.cache import Cache, fingerprint, read_flags, record_to_flag, flag_to_record
from flagcount.cli import main
from flagcount.enumeration import EnumerationJob, enumerate_flags


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv("FLAGCOUNT_CACHE", str(d))
    return d


def test_enumerate_summary_and_cache_hit(tmp_path, cache_dir, caplog):
    out = tmp_path / "flags.jsonl"
    args = ["enumerate", "--n", "2", "--partition", "1,1", "--height", "inf", "--X", "2", "--out", str(out)]
    assert main(args) == 0
    summary = json.loads((tmp_path / "flags.jsonl.summary.json").read_text())
    assert summary["count"] == 4
    first = out.read_text()
    assert len(first.splitlines()) == 4
    rec = json.loads(first.splitlines()[0])
    assert set(rec) == {"partition", "bases", "covol_sq", "h_inf_sq", "h_ac_sq"}
    assert all("/" in c for c in rec["covol_sq"])
    assert not list(tmp_path.glob("**/*.partial"))
    caplog.clear()
    with caplog.at_level("INFO", logger="flagcount"):
        assert main(args) == 0
    assert "cache hit" in caplog.text
    assert json.loads((tmp_path / "flags.jsonl.summary.json").read_text()) == summary
    assert out.read_text() == first


def test_invalid_partition_writes_nothing(tmp_path, cache_dir, capsys):
    out = tmp_path / "x.jsonl"
    code = main(["enumerate", "--n", "2", "--partition", "1,2", "--height", "inf", "--X", "2", "--out", str(out)])
    assert code == 2
    assert "does not sum" in capsys.readouterr().err
    assert not list(tmp_path.iterdir()) or list(tmp_path.iterdir()) == []


def test_usage_errors_exit_2(cache_dir):
    assert main(["enumerate", "--partition", "1,1"]) == 2
    assert main(["bogus"]) == 2
    assert main(["enumerate", "--partition", "1,1", "--X", "0.5"]) == 2
    assert main(["verify", "--partition", "1,1", "--Xs", "4,2"]) == 2


def test_config_file_and_override(tmp_path, cache_dir):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# flat config\nn = 3\npartition = 1,2\nheight = inf\nX = 3\n")
    out = tmp_path / "o.jsonl"
    assert main(["enumerate", "--config", str(cfg), "--out", str(out)]) == 0
    base = json.loads((tmp_path / "o.jsonl.summary.json").read_text())["count"]
    assert main(["enumerate", "--config", str(cfg), "--X", "4", "--out", str(out)]) == 0
    bigger = json.loads((tmp_path / "o.jsonl.summary.json").read_text())["count"]
    assert bigger > base
    bad = tmp_path / "bad.cfg"
    bad.write_text("partition 1,1\n")
    assert main(["enumerate", "--config", str(bad)]) == 2


def test_emit_shapes_and_directions(tmp_path, cache_dir):
    out = tmp_path / "s.jsonl"
    assert main(["enumerate", "--partition", "2,1", "--X", "2", "--out", str(out), "--emit-shapes",
                 "--emit-directions"]) == 0
    recs = [json.loads(line) for line in out.read_text().splitlines()]
    assert all(len(r["shapes"]) == 2 and r["shapes"][1] is None for r in recs)
    assert all(len(r["directions"]) == 1 for r in recs)


def test_predict_cancellation(tmp_path, capsys):
    import math

    assert main(["predict", "--partition", "1,1,1", "--height", "ac", "--X", repr(math.e)]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert abs(payload["main_term"]) < 1e-9
    assert payload["exponent"] == 1 and payload["log_poly_coeffs"] == [-1.0, 1.0]


def test_verify_pass_and_csv(tmp_path, cache_dir):
    out = tmp_path / "v.csv"
    assert main(["verify", "--partition", "1,1", "--height", "inf", "--Xs", "25,50,100,200", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "X,count,predicted,ratio,fitted_exponent,target_exponent"
    assert len(lines) == 5
    summary = json.loads((tmp_path / "v.csv.summary.json").read_text())
    assert summary["pass"] is True


def test_verify_tolerance_failure(tmp_path, cache_dir):
    out = tmp_path / "v.csv"
    assert main(["verify", "--partition", "1,1", "--Xs", "3,5,8", "--ratio-tol", "0.0001", "--out", str(out)]) == 1


def test_equidist_cells_too_fine(tmp_path, cache_dir, capsys):
    code = main(["equidist", "--partition", "1,2", "--target", "direction", "--X", "2", "--cells", "8"])
    assert code == 2
    assert "cells too fine" in capsys.readouterr().err


def test_equidist_directions(tmp_path, cache_dir):
    out = tmp_path / "e.csv"
    code = main(["equidist", "--partition", "1,2", "--target", "direction", "--X", "8", "--out", str(out)])
    summary = json.loads((tmp_path / "e.csv.summary.json").read_text())
    assert code == (0 if summary["pass"] else 1)
    header = out.read_text().splitlines()[0]
    assert header == "cell_id,mass,observed,expected,contribution"


def test_cache_round_trip(tmp_path):
    job = EnumerationJob.make((1, 1, 1), "ac", bound_sq=200)
    flags = list(enumerate_flags(job))
    cache = Cache(tmp_path)
    entry = cache.store(job, flags)
    assert entry.count == len(flags)
    assert list(read_flags(entry.jsonl_path)) == flags
    assert cache.lookup(job).fingerprint == entry.fingerprint
    for f in flags[:50]:
        assert record_to_flag(json.loads(json.dumps(flag_to_record(f)))) == f


def test_fingerprint_stability():
    a = EnumerationJob.make((1, 2), "inf", X=5)
    b = EnumerationJob.make((1, 2), "inf", bound_sq=Fraction(25))
    assert fingerprint(a) == fingerprint(b)
    assert fingerprint(a) != fingerprint(EnumerationJob.make((2, 1), "inf", X=5))
    assert fingerprint(a) != fingerprint(EnumerationJob.make((1, 2), "ac", X=5))


def test_schema_change_invalidates(tmp_path, monkeypatch):
    import flagcount.cache as cache_mod

    job = EnumerationJob.make((1, 1), "inf", X=3)
    cache = Cache(tmp_path)
    cache.store(job, enumerate_flags(job))
    assert cache.lookup(job) is not None
    monkeypatch.setattr(cache_mod, "SCHEMA_VERSION", cache_mod.SCHEMA_VERSION + 1)
    assert cache.lookup(job) is None
