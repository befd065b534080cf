import io
import json

import pytest

from metageo.caps import Caps
from metageo.cli import ConfigError, RunConfig, bench, bench_instances, main, oracle_check, run
from metageo.metabelian import compute_flow, flow_from_json, metabelian_equal
from metageo.words import Alphabet, parse_word
from metageo.wreath import element_from_json, evaluate, parse_group_spec

LAMP2 = parse_group_spec("Z2 wr Z^2")


def call(argv, text=""):
    out = io.StringIO()
    code = main(argv, stdin=io.StringIO(text), stdout=out)
    lines = out.getvalue().splitlines()
    return code, lines


def records(argv, text=""):
    code, lines = call(argv, text)
    return code, [json.loads(line) for line in lines]


def test_metabelian_exact_record():
    code, recs = records(["geodesic-metabelian", "--rank", "2"], "x1 x2 x1^-1 x2^-1\n")
    assert code == 0
    (rec,) = recs
    assert rec["length"] == 4
    assert rec["method"] == "metabelian-exact"
    word = parse_word(rec["word"], Alphabet.metabelian(2))
    assert metabelian_equal(word, parse_word("x1 x2 x1^-1 x2^-1", Alphabet.metabelian(2)), 2)


def test_normal_form_record():
    code, recs = records(["normal-form", "--group", "Z2 wr Z^2"], "b1 a1 b1^-1\n")
    assert code == 0
    assert recs[0]["data"] == {"support": [{"position": [1, 0], "value": [1]}], "cursor": [0, 0]}
    g = element_from_json(recs[0]["data"], LAMP2)
    assert g == evaluate(parse_word("b1 a1 b1^-1", LAMP2.alphabet), LAMP2)


def test_empty_input():
    assert call(["geodesic-metabelian", "--rank", "2"], "") == (0, [])


def test_per_word_errors_do_not_stop_the_stream():
    code, recs = records(["geodesic-wreath", "--group", "Z2 wr Z^2"], "b1 b1\nb7\nx1\na1\n")
    assert code == 1
    assert [r["input"] for r in recs] == ["b1 b1", "b7", "x1", "a1"]
    assert recs[0]["length"] == 2
    assert "error" in recs[1] and "token 0" in recs[1]["error"]
    assert "error" in recs[2]
    assert recs[3]["length"] == 1


def test_blank_word_line_is_identity():
    code, recs = records(["geodesic-wreath", "--group", "Z2 wr Z^1"], "# header\n\n")
    assert code == 0
    assert len(recs) == 1 and recs[0]["length"] == 0


@pytest.mark.parametrize("argv", [
    ["geodesic-wreath"],
    ["geodesic-wreath", "--group", "Z2 wr Z2"],
    ["geodesic-metabelian", "--rank", "0"],
    ["geodesic-metabelian", "--rank", "2", "--solver", "line-exact"],
    ["oracle-check"],
    ["oracle-check", "--rank", "2", "--group", "Z2 wr Z^1"],
])
def test_bad_config_exit_2(argv):
    assert call(argv)[0] == 2


def test_unknown_command_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"], stdout=io.StringIO())
    assert info.value.code == 2


def test_missing_input_exit_3(tmp_path):
    code, _ = call(["flow", "--rank", "2", "--input", str(tmp_path / "absent.txt")])
    assert code == 3


def test_input_file(tmp_path):
    path = tmp_path / "words.txt"
    path.write_text("x1 x1\n", encoding="utf-8")
    code, recs = records(["flow", "--rank", "1", "--input", str(path)])
    assert code == 0
    assert flow_from_json(recs[0]["data"]) == compute_flow(parse_word("x1 x1", Alphabet.metabelian(1)), 1)


def test_run_config_validation():
    with pytest.raises(ConfigError):
        RunConfig("tsp", solver="group")
    with pytest.raises(ConfigError):
        RunConfig("flow")
    assert RunConfig("flow", rank=2).alphabet == Alphabet.metabelian(2)


def test_compare_reports_ratio():
    code, recs = records(["geodesic-metabelian", "--rank", "2", "--solver", "mst", "--compare"],
                         "x1 x1 x1 x1 x2 x1^-1 x2^-1 x1^-1 x1^-1 x1^-1\n")
    assert code == 0
    rec = recs[0]
    assert rec["exact"] == 10
    assert rec["ratio"] == rec["estimate"] / rec["exact"]
    assert "length" not in rec


def test_ratio_absent_without_compare():
    _, recs = records(["geodesic-wreath", "--group", "Z2 wr Z^2", "--solver", "heuristic"], "a1 b1 a1\n")
    assert "ratio" not in recs[0] and "exact" not in recs[0]
    assert recs[0]["estimate"] == 3


def test_text_format():
    code, lines = call(["geodesic-wreath", "--group", "Z2 wr Z^2", "--format", "text"], "b1 a1 b1^-1\nq\n")
    assert code == 1
    assert lines[0].split("\t")[:3] == ["b1 a1 b1^-1", "wreath-exact", "3"]
    assert lines[1].startswith("q\tERROR\t")


TSP_LINE = json.dumps({"start": [0, 0], "targets": [[1, 0], [0, 1]], "end": [0, 0]})
STEINER_LINE = json.dumps({"terminals": [[0, 0], [2, 0], [1, 2]]})
GROUP_LINE = json.dumps({"groups": [[[0, 0]], [[5, 0], [6, 0], [5, 1], [6, 1]]]})


@pytest.mark.parametrize("solver, key, value", [
    ("exact", "length", 4), ("bruteforce", "length", 4), ("heuristic", "estimate", 4), ("mst", "estimate", 4),
])
def test_tsp_records(solver, key, value):
    code, recs = records(["tsp", "--solver", solver], TSP_LINE + "\n\n")
    assert code == 0 and len(recs) == 1
    assert recs[0][key] == value
    assert recs[0]["data"]["length"] == value


def test_tsp_over_cap_falls_back_and_says_so():
    line = json.dumps({"start": [0], "targets": [[i] for i in range(1, 6)], "end": [0]})
    _, recs = records(["tsp", "--max-exact", "3"], line + "\n")
    assert recs[0]["method"] == "tsp-exact-fallback-heuristic"
    assert recs[0]["estimate"] == 10


@pytest.mark.parametrize("line, solver, method, value", [
    (STEINER_LINE, "exact", "rsmt-exact", 4),
    (STEINER_LINE, "mst", "rsmt-mst", 5),
    (GROUP_LINE, "exact", "group-exact", 5),
    (GROUP_LINE, "heuristic", "group-representatives-exact", 5),
])
def test_steiner_records(line, solver, method, value):
    code, recs = records(["steiner", "--solver", solver], line + "\n")
    assert code == 0
    assert recs[0]["method"] == method
    assert value in (recs[0].get("length"), recs[0].get("estimate"))
    assert len(recs[0]["data"]["edges"]) == recs[0]["data"]["length"]


def test_bad_json_line_is_a_word_error():
    code, recs = records(["steiner"], "{not json\n" + STEINER_LINE + "\n")
    assert code == 1
    assert "error" in recs[0] and recs[1]["length"] == 4


def test_parallel_run_keeps_order():
    words = ["x1", "x1 x2 x1^-1 x2^-1", "x2 x2 x2", "", "x1^-1 x2"] * 8
    config = RunConfig("geodesic-metabelian", rank=2)
    serial = [r.length for r in run(config, words)]
    parallel = [r.length for r in run(config, words, jobs=2)]
    assert serial == parallel
    assert serial[:5] == [1, 4, 3, 0, 2]


@pytest.mark.parametrize("kwargs, checked", [
    ({"rank": 2, "radius": 4}, 161),
    ({"group": LAMP2, "radius": 4}, 1 + 6 + 30 + 150 + 750),
])
def test_oracle_check_exhaustive(kwargs, checked):
    report = oracle_check(RunConfig("oracle-check", **kwargs))
    assert report["checked"] == checked
    assert report["mismatches"] == 0
    assert report["max_ratio"] == 1.0
    assert report["mode"] == "exhaustive"


def test_oracle_check_approximate_sampled():
    config = RunConfig("oracle-check", rank=2, radius=7, solver="mst", samples=300, seed=3)
    report = oracle_check(config)
    assert report["checked"] == 300 and report["mode"] == "sampled"
    assert report["below_oracle"] == 0
    assert report["max_excess"] <= 2.0
    assert oracle_check(config) == report


def test_oracle_check_cli_exit_codes():
    code, recs = records(["oracle-check", "--rank", "2", "--radius", "3"])
    assert code == 0 and recs[0]["mismatches"] == 0
    code, _ = call(["oracle-check", "--rank", "2", "--radius", "8", "--max-exact", "4"])
    assert code == 0


def test_oracle_check_cap_is_config_error(monkeypatch):
    monkeypatch.setattr("metageo.cli.default_caps", lambda: Caps(bfs_states=50))
    assert call(["oracle-check", "--rank", "2", "--radius", "6"])[0] == 2


def test_bench_is_deterministic_and_well_formed():
    assert bench_instances(7, [5, 6], 2) == bench_instances(7, [5, 6], 2)
    rows = bench(RunConfig("bench", seed=7, sizes=(5, 6, 7), repeats=2))
    assert [r["size"] for r in rows] == [5, 6, 7]
    for r in rows:
        assert r["nn_2opt_max_ratio"] >= 1.0 and r["mst_shortcut_max_ratio"] >= 1.0
        assert {"held_karp_median_ms", "nn_2opt_median_ms", "mst_shortcut_median_ms",
                "heuristic_faster_from"} <= set(r)


def test_bench_cli():
    code, recs = records(["bench", "--sizes", "4,5", "--repeats", "1"])
    assert code == 0 and [r["size"] for r in recs] == [4, 5]
