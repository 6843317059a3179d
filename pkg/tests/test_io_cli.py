import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from conftest import dumbbell, room, room_with_hole, robust_walk, strip

from squarebots.cli import main
from squarebots.io import (
    FileFormatError,
    dumps,
    environment_from_dict,
    environment_to_dict,
    plan_from_dict,
    plan_to_dict,
    read_environment,
    read_plan,
    write_environment,
    write_plan,
)
from squarebots.plan_model import Plan, cost

SVG = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def files(tmp_path):
    def put(name, env):
        p = tmp_path / f"{name}.json"
        write_environment(p, env, name)
        return str(p)

    return put


def test_environment_round_trip(tmp_path):
    env = room_with_hole(10, (4.1, 4, 6, 6.3))
    write_environment(tmp_path / "e.json", env, "hole")
    back, name = read_environment(tmp_path / "e.json")
    assert name == "hole" and back == env
    assert environment_from_dict(json.loads(dumps(environment_to_dict(env))))[0] == env


def test_plan_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    p = Plan.from_configs(rng.uniform(0, 10, (4, 2, 2)) / 3)
    write_plan(tmp_path / "p.json", p, cost(p), {"epsilon": 0.1})
    assert read_plan(tmp_path / "p.json") == p
    assert plan_from_dict(json.loads(dumps(plan_to_dict(p)))) == p


def test_parse_errors_carry_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"outer": [[0, 0], [1, 0],\n [1, 1]')
    with pytest.raises(FileFormatError, match=r"bad\.json:\d+:\d+"):
        read_environment(bad)
    with pytest.raises(FileFormatError, match="outer"):
        environment_from_dict({"holes": []})
    with pytest.raises(FileFormatError, match=r"breakpoints\[1\]"):
        plan_from_dict({"k": 1, "breakpoints": [[["0", "0"]], [["1", "1"], ["2", "2"]]]})


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_plan_then_verify(files, tmp_path, capsys):
    env = files("room", room(20))
    out = str(tmp_path / "p.json")
    code, _, err = run(["plan", env, "--start", "2,2", "--target", "18,18", "--epsilon", "0.5", "-o", out], capsys)
    assert code == 0
    summary = json.loads(err.splitlines()[0])
    assert summary["cost"] == pytest.approx(math.hypot(16, 16), abs=1e-6)
    assert summary["status"] == "found" and summary["landmarks"] > 0
    assert run(["verify", env, out], capsys)[0] == 0
    code, report, err = run(["verify", env, out, "--radius", "2.5"], capsys)
    assert code == 1 and not json.loads(report)["feasible"] and "leg 0" in err


def test_stationary_plan_verifies(files, tmp_path, capsys):
    env = files("room", room(10))
    write_plan(tmp_path / "s.json", Plan.from_configs([[(5, 5)]]))
    assert run(["verify", env, str(tmp_path / "s.json")], capsys)[0] == 0


def test_blocked_swap_exits_3(files, capsys):
    env = files("strip", strip(12, 3))
    code, out, err = run(["plan", env, "--start", "2,1.5", "--start", "10,1.5", "--target", "10,1.5",
                          "--target", "2,1.5", "--pitch", "1"], capsys)
    assert code == 3 and out == "" and "unreachable" in err


def test_input_errors_exit_2(files, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{ nope")
    code, _, err = run(["plan", str(bad), "--start", "1,1", "--target", "2,2"], capsys)
    assert code == 2 and "bad.json:1:" in err
    env = files("room", room(10))
    assert run(["plan", env, "--start", "5,5"], capsys)[0] == 2
    assert run(["plan", env, "--start", "0.5,5", "--target", "5,5"], capsys)[0] == 2
    assert run(["plan", env, "--start", "5,5", "--target", "6,6", "--threads", "0"], capsys)[0] == 2
    assert run(["render", env], capsys)[0] == 2


def test_budget_exits_4(files, capsys):
    env = files("room", room(12))
    code, _, err = run(["plan", env, "--start", "4,6", "--start", "8,6", "--target", "8,6", "--target", "4,6",
                        "--pitch", "0.5", "--budget-expansions", "3"], capsys)
    assert code == 4 and "expanded" in err


def test_simplify_cli(files, tmp_path, capsys):
    e = room(40)
    env = files("room40", e)
    p = robust_walk(np.random.default_rng(3), e, 2, 1.0, 30, step=0.3)
    write_plan(tmp_path / "j.json", p)
    out = str(tmp_path / "s.json")
    code, _, err = run(["simplify", env, str(tmp_path / "j.json"), "--rho", "1", "-o", out], capsys)
    assert code == 0
    q = read_plan(out)
    assert len(q.breakpoints) < len(p.breakpoints) and cost(q) <= cost(p) + 1e-9
    straight = Plan.from_configs([[(5, 5)], [(30, 20)]])
    write_plan(tmp_path / "line.json", straight)
    code, text, _ = run(["simplify", env, str(tmp_path / "line.json")], capsys)
    assert code == 0 and read_plan_text(text) == straight
    write_plan(tmp_path / "tight.json", Plan.from_configs([[(1.5, 5)], [(10, 5)]]))
    code, _, err = run(["simplify", env, str(tmp_path / "tight.json")], capsys)
    assert code == 2 and "violations" in err


def read_plan_text(text):
    return plan_from_dict(json.loads(text))


def test_diagnose_cli(files, capsys):
    code, out, _ = run(["diagnose", files("dumbbell", dumbbell())], capsys)
    rep = json.loads(out)
    assert code == 0 and len(rep["corridors"]) == 1
    c = rep["corridors"][0]
    assert float(c["width"]) == pytest.approx(1) and float(c["depth"]) == pytest.approx(20)
    code, out, _ = run(["diagnose", files("room", room(30)), "--sweep", "50", "--far-distance", "3"], capsys)
    rep = json.loads(out)
    assert rep["corridors"] == [] and rep["far_topology"]["checked"] == 50


def _svg(path):
    return ET.parse(path).getroot()


def test_render_structure(files, tmp_path, capsys):
    env = files("room", room(12))
    swap = Plan.from_configs([[(3, 3), (9, 9)], [(3, 9), (9, 3)], [(9, 9), (3, 3)]])
    write_plan(tmp_path / "swap.json", swap)
    svg = tmp_path / "swap.svg"
    assert run(["render", env, str(tmp_path / "swap.json"), "-o", str(svg)], capsys)[0] == 0
    root = _svg(svg)
    traces = [p for p in root.iter(f"{SVG}path") if "trace" in p.get("class", "")]
    assert len(traces) == 2 and traces[0].get("stroke") != traces[1].get("stroke")
    still = Plan.from_configs([[(3, 3), (9, 9)]])
    write_plan(tmp_path / "still.json", still)
    svg2 = tmp_path / "still.svg"
    assert run(["render", env, str(tmp_path / "still.json"), "-o", str(svg2), "--animate"], capsys)[0] == 0
    root = _svg(svg2)
    assert not [p for p in root.iter(f"{SVG}path") if "trace" in p.get("class", "")]
    assert [r for r in root.iter(f"{SVG}rect") if "robot" in r.get("class", "")]


def test_plan_files_identical_across_threads(files, tmp_path, capsys):
    env = files("room", room(12))
    blobs = []
    for threads in ("1", "8", "1"):
        out = tmp_path / f"p{threads}{len(blobs)}.json"
        code, _, _ = run(["plan", env, "--start", "4,6", "--start", "8,6", "--target", "8,6", "--target", "4,6",
                          "--pitch", "1", "--threads", threads, "-o", str(out)], capsys)
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]
