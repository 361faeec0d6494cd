import json
import os

import numpy as np
import pytest

from trajcore import Abstraction, enumerate_successes
from trajcore import formats
from trajcore.cli import main
from trajcore.envs import DEFAULT_COOP, DEFAULT_KEYDOOR, build_coop_keydoor, build_keydoor


@pytest.fixture(scope="module")
def keydoor():
    return build_keydoor(DEFAULT_KEYDOOR)


@pytest.fixture(scope="module")
def coop():
    return build_coop_keydoor(DEFAULT_COOP)


# ---------------------------------------------------------------------------
# round trips
# ---------------------------------------------------------------------------


def test_mdp_round_trip(tmp_path, keydoor):
    mdp, _ = keydoor
    path = tmp_path / "m.json"
    formats.write_json(str(path), formats.mdp_to_payload(mdp))
    loaded = formats.mdp_from_payload(formats.read_json(str(path)), str(path))
    assert np.array_equal(loaded.kernel, mdp.kernel)
    assert np.array_equal(loaded.reward, mdp.reward)
    assert np.array_equal(loaded.initial, mdp.initial)
    assert loaded.goals == mdp.goals
    assert loaded.horizon == mdp.horizon
    assert loaded.goal_absorbing == mdp.goal_absorbing


def test_game_schedule_and_phi_round_trip(tmp_path, coop):
    game, schedule, phi = coop
    gp = tmp_path / "g.json"
    sp = tmp_path / "s.json"
    pp = tmp_path / "p.json"
    formats.write_json(str(gp), formats.game_to_payload(game))
    formats.write_json(str(sp), formats.schedule_to_payload(schedule))
    formats.write_json(str(pp), formats.abstraction_to_payload(phi))

    game2 = formats.game_from_payload(formats.read_json(str(gp)), str(gp))
    assert np.array_equal(game2.joint_kernel, game.joint_kernel)
    assert np.array_equal(game2.reward_1, game.reward_1)
    assert game2.goals == game.goals

    schedule2 = formats.schedule_from_payload(formats.read_json(str(sp)), str(sp))
    assert [p.label for p in schedule2] == [p.label for p in schedule]
    for a, b in zip(schedule, schedule2):
        assert np.array_equal(a.probs, b.probs)

    phi2 = formats.abstraction_from_payload(formats.read_json(str(pp)), str(pp))
    assert phi2.mapping == phi.mapping
    assert phi2.label == phi.label
    assert phi2.collapse_runs == phi.collapse_runs


def test_identity_abstraction_round_trip(tmp_path):
    path = tmp_path / "id.json"
    formats.write_json(str(path), formats.abstraction_to_payload(Abstraction()))
    loaded = formats.abstraction_from_payload(formats.read_json(str(path)), str(path))
    assert loaded.is_identity


def test_successes_round_trip(tmp_path, keydoor):
    mdp, _ = keydoor
    successes = enumerate_successes(mdp)
    path = tmp_path / "succ.json"
    formats.write_json(str(path), formats.successes_to_payload(successes))
    loaded = formats.successes_from_payload(formats.read_json(str(path)), str(path))
    assert loaded.as_set() == successes.as_set()


def test_config_round_trips(tmp_path):
    kp = tmp_path / "kd.json"
    formats.write_json(str(kp), formats.keydoor_config_to_payload(DEFAULT_KEYDOOR))
    assert (
        formats.keydoor_config_from_payload(formats.read_json(str(kp)), str(kp))
        == DEFAULT_KEYDOOR
    )
    cp = tmp_path / "coop.json"
    formats.write_json(str(cp), formats.coop_config_to_payload(DEFAULT_COOP))
    assert (
        formats.coop_config_from_payload(formats.read_json(str(cp)), str(cp))
        == DEFAULT_COOP
    )


def test_parse_errors_name_the_problem(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(formats.ParseError) as err:
        formats.read_json(str(path))
    assert "line" in str(err.value)

    path2 = tmp_path / "wrong.json"
    formats.write_json(str(path2), {"format": "mdp", "version": 1})
    with pytest.raises(formats.ParseError) as err:
        formats.mdp_from_payload(formats.read_json(str(path2)), str(path2))
    assert "num_states" in str(err.value)


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def _write_keydoor_config(tmp_path):
    path = tmp_path / "kd_config.json"
    formats.write_json(str(path), formats.keydoor_config_to_payload(DEFAULT_KEYDOOR))
    return str(path)


def _write_coop_config(tmp_path):
    path = tmp_path / "coop_config.json"
    formats.write_json(str(path), formats.coop_config_to_payload(DEFAULT_COOP))
    return str(path)


def test_cli_gen_enumerate_mine_pipeline(tmp_path, capsys):
    cfg = _write_keydoor_config(tmp_path)
    out_dir = str(tmp_path)
    assert main(["gen", "keydoor", cfg, "--out-dir", out_dir, "--prefix", "kd"]) == 0
    report = json.loads(capsys.readouterr().out)
    written = report["results"]["written"]
    assert all(os.path.exists(p) for p in written)
    mdp_file = written[0]
    phi_file = written[1]

    succ_file = str(tmp_path / "succ.json")
    assert main(["enumerate", mdp_file, "--out", succ_file]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["count"] == 8
    assert os.path.exists(succ_file)

    assert main(["mine", succ_file, "--phi", phi_file, "--strip-terminal"]) == 0
    report = json.loads(capsys.readouterr().out)
    members = report["results"]["members"]
    assert ["find_key", "reach_door", "open_door"] != members  # sanity: list of lists
    assert any(
        all(sym in member for sym in ("find_key", "reach_door", "open_door"))
        for member in members
    )
    assert report["results"]["alphabet_tag"] == "keydoor"
    assert report["results"]["strip_terminal_applied"] is True

    # mining straight from the MDP file gives the same core
    assert main(["mine", mdp_file, "--phi", phi_file, "--strip-terminal"]) == 0
    report2 = json.loads(capsys.readouterr().out)
    assert report2["results"]["members"] == members


def test_cli_induce_budget_drift(tmp_path, capsys):
    cfg = _write_coop_config(tmp_path)
    assert main(["gen", "coop-keydoor", cfg, "--out-dir", str(tmp_path), "--prefix", "coop"]) == 0
    report = json.loads(capsys.readouterr().out)
    game_file, schedule_file, phi_file = report["results"]["written"]

    # induce with an explicit peer file
    schedule_payload = formats.read_json(schedule_file)
    peer_file = str(tmp_path / "peer.json")
    first = schedule_payload["policies"][0]
    formats.write_json(
        str(peer_file),
        {
            "format": "peer_policy",
            "version": 1,
            "label": first["label"],
            "probs": first["probs"],
        },
    )
    induced_file = str(tmp_path / "induced.json")
    assert main(["induce", game_file, peer_file, "--out", induced_file]) == 0
    capsys.readouterr()
    induced = formats.mdp_from_payload(formats.read_json(induced_file), induced_file)
    assert induced.horizon == DEFAULT_COOP.horizon

    assert main(["budget", game_file, schedule_file]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["total"] > 0.0
    assert len(report["results"]["kernel_deltas"]) == 1

    out_file = str(tmp_path / "drift.json")
    assert main([
        "drift", game_file, schedule_file,
        "--phi", phi_file, "--strip-terminal", "--out", out_file,
    ]) == 0
    report = json.loads(capsys.readouterr().out)
    results = report["results"]
    assert results["budget"]["total"] > 0.0
    step = results["steps"][0]
    assert step["vanished"]
    assert step["common_within_individual"] is True
    assert step["literal_intersection"] == []
    assert results["individual_core_definition"]
    assert os.path.exists(out_file)


def test_cli_enumerate_unreachable_goal_counts_zero(tmp_path, capsys, chain_mdp):
    payload = formats.mdp_to_payload(chain_mdp)
    payload["kernel"][1][1] = [1.0, 0.0, 0.0]  # sever the only route to the goal
    payload["goal_absorbing"] = False
    path = tmp_path / "blocked.json"
    formats.write_json(str(path), payload)
    assert main(["enumerate", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["count"] == 0


def test_cli_mine_empty_successes_is_validation_error(tmp_path, capsys):
    path = tmp_path / "empty.json"
    formats.write_json(
        str(path),
        {"format": "successes", "version": 1, "count": 0, "trajectories": []},
    )
    assert main(["mine", str(path)]) == 4
    capsys.readouterr()


def test_cli_gen_infeasible_config_is_validation_error(tmp_path, capsys):
    payload = formats.keydoor_config_to_payload(DEFAULT_KEYDOOR)
    payload["horizon"] = 2
    path = tmp_path / "bad_cfg.json"
    formats.write_json(str(path), payload)
    assert main(["gen", "keydoor", str(path), "--out-dir", str(tmp_path)]) == 4
    capsys.readouterr()


def test_cli_mine_echoes_collapse_runs_flag(tmp_path, capsys):
    cfg = _write_keydoor_config(tmp_path)
    assert main(["gen", "keydoor", cfg, "--out-dir", str(tmp_path), "--prefix", "kd"]) == 0
    report = json.loads(capsys.readouterr().out)
    mdp_file, phi_file = report["results"]["written"]
    assert main(["mine", mdp_file, "--phi", phi_file, "--collapse-runs"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["collapse_runs"] is True
    # collapsed members hold no immediate symbol repeats
    for member in report["results"]["members"]:
        assert all(a != b for a, b in zip(member, member[1:]))


def test_cli_oracle_check(capsys):
    assert main(["oracle-check", "--trials", "25", "--seed", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["results"]["agreements"] == 25
    assert report["results"]["mismatches"] == []


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["enumerate", str(bad)]) == 3

    # malformed probabilities: validation failure
    mdp, _ = build_keydoor(DEFAULT_KEYDOOR)
    payload = formats.mdp_to_payload(mdp)
    payload["kernel"][0][0][0] = 0.5
    invalid = tmp_path / "invalid.json"
    formats.write_json(str(invalid), payload)
    assert main(["enumerate", str(invalid)]) == 4

    # a tiny budget trips the guard
    good = tmp_path / "good.json"
    formats.write_json(str(good), formats.mdp_to_payload(mdp))
    assert main(["enumerate", str(good), "--budget", "3"]) == 5
    capsys.readouterr()


def test_cli_env_budget_override(tmp_path, capsys, monkeypatch):
    mdp, _ = build_keydoor(DEFAULT_KEYDOOR)
    good = tmp_path / "good.json"
    formats.write_json(str(good), formats.mdp_to_payload(mdp))
    monkeypatch.setenv("TRAJCORE_BUDGET", "3")
    assert main(["enumerate", str(good)]) == 5
    monkeypatch.setenv("TRAJCORE_BUDGET", "junk")
    assert main(["enumerate", str(good)]) == 3
    monkeypatch.delenv("TRAJCORE_BUDGET")
    assert main(["enumerate", str(good)]) == 0
    capsys.readouterr()


def test_cli_reports_are_deterministic(tmp_path, capsys):
    mdp, _ = build_keydoor(DEFAULT_KEYDOOR)
    good = tmp_path / "good.json"
    formats.write_json(str(good), formats.mdp_to_payload(mdp))
    assert main(["enumerate", str(good)]) == 0
    first = json.loads(capsys.readouterr().out)
    assert main(["enumerate", str(good)]) == 0
    second = json.loads(capsys.readouterr().out)
    assert first["results"] == second["results"]
    assert first["results_digest"] == second["results_digest"]
    assert first["inputs"] == second["inputs"]


def test_write_json_is_atomic_and_stable(tmp_path):
    path = str(tmp_path / "x.json")
    formats.write_json(path, {"b": 1, "a": [1.5, 0.1]})
    with open(path) as handle:
        text = handle.read()
    formats.write_json(path, {"b": 1, "a": [1.5, 0.1]})
    with open(path) as handle:
        assert handle.read() == text
    assert not [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]


def test_float_round_trip_precision(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.random(64)
    values /= values.sum()
    path = str(tmp_path / "probs.json")
    formats.write_json(path, {"v": values.tolist()})
    loaded = np.array(formats.read_json(path)["v"])
    assert np.array_equal(loaded, values)
