import json
from fractions import Fraction

import pytest

from tensorlab import cli
from tensorlab.cli import ExperimentConfig, emit, parse_config, run
from tensorlab.errors import ValidationError
from tensorlab.matchgate import complete_bipartite, complete_graph, dumps_graph
from tensorlab.minrank import gurvits_space
from tensorlab.ranks import w_state
from tensorlab.tensors import dumps_tensor


def payload_bytes(records):
    return [json.dumps(r.payload, sort_keys=True).encode() for r in records]


# --- config parsing -----------------------------------------------------------

def test_parse_flags_terracini():
    cfg = parse_config(["terracini", "--variety", "segre:2,2,2", "--r", "2"])
    assert cfg.command == "terracini"
    assert cfg.parameters == {"variety": "segre:2,2,2", "r": 2, "trials": 3}
    assert cfg.seed == 0 and cfg.format == "json"


def test_parse_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(
        json.dumps(
            {
                "command": "minrank",
                "parameters": {"gurvits": 2},
                "seed": 7,
                "format": "text",
            }
        )
    )
    cfg = parse_config(["--config", str(path)])
    assert cfg.command == "minrank"
    assert cfg.parameters == {"gurvits": 2}
    assert cfg.seed == 7 and cfg.format == "text"


def test_config_rejects_unknown_parameter_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(
        json.dumps({"command": "terracini", "parameters": {"rmax_typo": 3}})
    )
    with pytest.raises(ValidationError, match="rmax_typo"):
        parse_config(["--config", str(path)])


def test_config_rejects_unknown_command(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "solve_everything"}))
    with pytest.raises(ValidationError, match="solve_everything"):
        parse_config(["--config", str(path)])


def test_config_rejects_unknown_top_level_key(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"command": "rank", "threads": 4}))
    with pytest.raises(ValidationError, match="threads"):
        parse_config(["--config", str(path)])


def test_missing_required_parameter_named():
    cfg = ExperimentConfig("terracini", {})
    with pytest.raises(ValidationError, match="variety"):
        run(cfg)
    cfg2 = ExperimentConfig("kron", {})
    with pytest.raises(ValidationError, match="triple"):
        run(cfg2)


def test_malformed_value_named():
    cfg = ExperimentConfig("decompose", {"form": "1,oops,3"})
    with pytest.raises(ValidationError, match="form"):
        run(cfg)


# --- exit codes -----------------------------------------------------------------

def test_main_exit_codes(tmp_path, capsys):
    assert cli.main(["minrank", "--friedland", "1"]) == 0
    capsys.readouterr()
    assert cli.main(["kron", "--triple", "bad partition"]) == 2
    capsys.readouterr()
    assert cli.main(["kron", "--triple", "15;15;15"]) == 3  # size above the cap
    capsys.readouterr()


def test_main_cap_exit_code(capsys):
    code = cli.main(["kron", "--cone", "2,2,2,11"])
    assert code == 3
    assert "cap" in capsys.readouterr().err


def test_main_validation_exit_code(capsys):
    assert cli.main(["terracini", "--variety", "nope:1"]) == 2
    capsys.readouterr()


# --- determinism ------------------------------------------------------------------

COMMANDS_FOR_DETERMINISM = [
    ["terracini", "--variety", "segre:2,2,2", "--r", "2", "--seed", "42"],
    ["terracini", "--variety", "veronese:3,4", "--r", "5", "--seed", "9"],
    ["rank", "--w-state", "3", "--field", "2", "--bruteforce", "3"],
    ["decompose", "--form", "1,0,0,1"],
    ["kron", "--triple", "2,1;2,1;2,1"],
    ["minrank", "--gurvits", "2", "--seed", "5"],
    ["minrank", "--friedland", "3", "--seed", "5"],
]


@pytest.mark.parametrize("argv", COMMANDS_FOR_DETERMINISM, ids=lambda a: a[0] + ":" + a[-1])
def test_payloads_byte_identical_across_reruns(argv):
    first = payload_bytes(run(parse_config(argv)))
    second = payload_bytes(run(parse_config(argv)))
    assert first == second


def test_records_embed_seed_and_version():
    records = run(parse_config(["minrank", "--gurvits", "1", "--seed", "11"]))
    rec = records[0].as_dict()
    assert rec["seed"] == 11
    assert rec["version"] == cli.__version__
    assert "timestamp" in rec and "wall_time_s" in rec


# --- output files and resume ---------------------------------------------------------

def test_output_appends_json_lines(tmp_path):
    out = tmp_path / "results.jsonl"
    argv = ["minrank", "--friedland", "1", "--output", str(out)]
    assert cli.main(argv) == 0
    assert cli.main(argv) == 0
    lines = [json.loads(l) for l in out.read_text().splitlines()]
    assert len(lines) == 2
    assert lines[0]["payload"] == lines[1]["payload"]


def test_terracini_scan_resumes_from_output(tmp_path):
    out = tmp_path / "scan.jsonl"
    argv = ["terracini", "--variety", "segre:2,2,2", "--scan", "--output", str(out)]
    assert cli.main(argv) == 0
    first = out.read_text().splitlines()
    assert len(first) == 2  # r = 1 and the saturating r = 2
    assert cli.main(argv) == 0
    assert out.read_text().splitlines() == first  # nothing recomputed


def test_terracini_partial_scan_completes(tmp_path):
    out = tmp_path / "scan.jsonl"
    # complete r = 1 only, then ask for the full scan
    assert cli.main(
        ["terracini", "--variety", "segre:2,2", "--r-max", "1", "--output", str(out)]
    ) == 0
    assert len(out.read_text().splitlines()) == 1
    assert cli.main(
        ["terracini", "--variety", "segre:2,2", "--scan", "--output", str(out)]
    ) == 0
    lines = [json.loads(l)["payload"] for l in out.read_text().splitlines()]
    assert [p["r"] for p in lines] == [1, 2]


# --- payload content round trips ---------------------------------------------------------

def test_rank_payload_tensor_canonical_round_trip(tmp_path):
    t = w_state(3)
    path = tmp_path / "w.tensor"
    path.write_text(dumps_tensor(t))
    records = run(parse_config(["rank", "--tensor", str(path)]))
    payload = records[0].payload
    assert payload["tensor_canonical"] == dumps_tensor(t)
    assert payload["multilinear_rank"] == [2, 2, 2]
    assert payload["border_rank_lower_bound"] == 2


def test_matchgate_payload(tmp_path):
    gpath = tmp_path / "k4.graph"
    gpath.write_text(dumps_graph(complete_graph(4)))
    records = run(parse_config(["matchgate", "--graph", str(gpath)]))
    payload = records[0].payload
    assert payload["matchings"] == 3
    assert payload["orientation"]["found"] is True

    g33 = tmp_path / "k33.graph"
    g33.write_text(dumps_graph(complete_bipartite(3, 3)))
    payload = run(parse_config(["matchgate", "--graph", str(g33)]))[0].payload
    assert payload["matchings"] == 6
    assert payload["orientation"]["found"] is False
    assert payload["orientation"]["candidates_tried"] == 512


def test_matchgate_signature_modes(tmp_path):
    gpath = tmp_path / "k4.graph"
    gpath.write_text(dumps_graph(complete_graph(4)))
    payload = run(parse_config(["matchgate", "--graph", str(gpath), "--subpfaffian"]))[0].payload
    sig = payload["signature"]
    assert len(sig) == 16

    spath = tmp_path / "sig.json"
    spath.write_text(json.dumps(sig))
    payload = run(parse_config(["matchgate", "--signature", str(spath)]))[0].payload
    assert payload["satisfies_identities"] is True

    nae = tmp_path / "nae.json"
    nae.write_text(json.dumps(["0", "1", "1", "1", "1", "1", "1", "0"]))
    payload = run(parse_config(["matchgate", "--signature", str(nae)]))[0].payload
    assert payload["satisfies_identities"] is False

    payload = run(
        parse_config(
            [
                "matchgate",
                "--signature",
                str(spath),
                "--basis",
                "1,1;1,-1",
                "--side",
                "recognizer",
            ]
        )
    )[0].payload
    assert payload["mode"] == "transform" and len(payload["signature"]) == 16


def test_emit_json_parses_back_losslessly():
    records = run(parse_config(["minrank", "--gurvits", "1"]))
    text = emit(records, "json")
    parsed = [json.loads(line) for line in text.strip().splitlines()]
    assert parsed[0]["payload"] == records[0].as_dict()["payload"]


def test_emit_csv_row_count():
    records = run(parse_config(["kron", "--cone", "2,2,2,3"]))
    table = records[0].payload["table"]
    text = emit(records, "csv")
    lines = text.strip().splitlines()
    assert len(lines) == len(table) + 1
    assert lines[0] == "lambda,mu,nu,K"


def test_emit_csv_rejects_non_tabular():
    records = run(parse_config(["minrank", "--friedland", "1"]))
    with pytest.raises(ValidationError):
        emit(records, "csv")


def test_emit_scan_csv_and_text():
    records = run(parse_config(["terracini", "--variety", "segre:2,2", "--scan"]))
    csv_text = emit(records, "csv")
    assert csv_text.splitlines()[0].startswith("variety,r,")
    assert len(csv_text.strip().splitlines()) == len(records) + 1
    txt = emit(records, "text")
    assert "segre:2,2" in txt


def test_rationals_serialized_as_strings_never_floats(tmp_path):
    from tensorlab.tensors import DenseTensor, dumps_tensor
    from tensorlab.rings import RATIONAL

    t = DenseTensor((2, 2), (Fraction(1, 3), Fraction(2, 3), 1, 0), RATIONAL)
    path = tmp_path / "t.tensor"
    path.write_text(dumps_tensor(t))
    payload = run(parse_config(["rank", "--tensor", str(path)]))[0].payload
    text = json.dumps(payload)
    assert "1/3" in payload["tensor_canonical"]
    assert "0.333" not in text
    # jsonable renders fractions as p/q strings
    assert cli.jsonable(Fraction(1, 3)) == "1/3"
    assert cli.jsonable(Fraction(4, 2)) == "2"


def test_minrank_subspace_mode(tmp_path):
    sp = gurvits_space(1)
    path = tmp_path / "x.json"
    path.write_text(sp.to_json())
    payload = run(parse_config(["minrank", "--subspace", str(path)]))[0].payload
    assert payload["certainty"] == "upper_bound"
    assert payload["min_rank"] == 2


def test_decompose_modes(tmp_path):
    payload = run(parse_config(["decompose", "--form", "1,0,0,1"]))[0].payload
    assert payload["rank"] == 2 and payload["exact"] is True

    from tensorlab.decomp import Decomposition
    from tensorlab.ranks import w_state_certificate

    dec = Decomposition.from_vectors(w_state_certificate(3))
    dpath = tmp_path / "dec.json"
    dpath.write_text(dec.to_json())
    tpath = tmp_path / "w.tensor"
    tpath.write_text(dumps_tensor(w_state(3)))
    payload = run(
        parse_config(
            ["decompose", "--tensor", str(tpath), "--decomposition", str(dpath)]
        )
    )[0].payload
    assert payload["mode"] == "gross"
    assert payload["minimality"] is False

    payload = run(parse_config(["decompose", "--decomposition", str(dpath), "--kruskal"]))[0].payload
    # repeated factor columns give k-ranks (1,1,1), far below 2r + 2 = 8
    assert payload["unique"] is False
    assert payload["k_ranks"] == [1, 1, 1]
