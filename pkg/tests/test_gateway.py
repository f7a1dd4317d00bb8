"""Gateway surface: CLI exit codes and files, HTTP endpoints, WS stream."""

import json
import random
import time

import pytest
from fastapi.testclient import TestClient

from skysim.fixtures import ring, two_node_line
from skysim.gateway.app import build_controller, create_app
from skysim.gateway.cli import main
from skysim.model import SimSettings, load_network, save_network
from skysim.protocol import InProcessController, TcpControllerServer

pytestmark = pytest.mark.filterwarnings("ignore::DeprecationWarning")


@pytest.fixture
def fixture_files(tmp_path):
    net = two_node_line(settings=SimSettings(hover_takeoff_s=0.0, hover_landing_s=0.0))
    network_path = tmp_path / "net.json"
    network_path.write_bytes(save_network(net))
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(
        json.dumps(
            {
                "requests": [
                    {"id": "r1", "origin": "a", "destination": "b", "payload_kg": 1.0,
                     "swarm_size": 1, "release_time_s": 0}
                ],
                "faults": [],
                "max_time_s": 600,
                "seed": 42,
            }
        )
    )
    return network_path, scenario_path, tmp_path


class TestCli:
    def test_run_writes_three_files(self, fixture_files, capsys):
        network, scenario, tmp = fixture_files
        out = tmp / "out"
        rc = main(["run", "--network", str(network), "--scenario", str(scenario),
                   "--out", str(out)])
        assert rc == 0
        assert (out / "frames.csv").is_file()
        assert (out / "events.csv").is_file()
        assert (out / "summary.json").is_file()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["completed"] == 1

    def test_missing_network_names_path(self, fixture_files, capsys):
        _, scenario, tmp = fixture_files
        rc = main(["run", "--network", str(tmp / "nope.json"), "--scenario", str(scenario),
                   "--out", str(tmp / "o")])
        assert rc == 2
        assert "nope.json" in capsys.readouterr().err

    def test_replay_is_byte_identical(self, fixture_files):
        network, scenario, tmp = fixture_files
        out1, out2 = tmp / "o1", tmp / "o2"
        assert main(["run", "--network", str(network), "--scenario", str(scenario),
                     "--out", str(out1), "--seed", "42", "--headless"]) == 0
        assert main(["run", "--network", str(network), "--scenario", str(scenario),
                     "--out", str(out2), "--seed", "42", "--headless"]) == 0
        for name in ("frames.csv", "events.csv", "summary.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_validate_ok(self, fixture_files, capsys):
        network, _, _ = fixture_files
        assert main(["validate", "--network", str(network)]) == 0
        assert "OK" in capsys.readouterr().out

    def test_validate_dangling_endpoint(self, tmp_path, capsys):
        doc = json.loads(save_network(two_node_line()))
        doc["segments"][0]["to"] = "ghost"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        rc = main(["validate", "--network", str(path)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "ghost" in err

    def test_validate_mutation_fuzz_never_crashes(self, tmp_path, capsys):
        rng = random.Random(1234)
        base = json.loads(save_network(ring(5)))
        for i in range(50):
            doc = json.loads(json.dumps(base))
            mutation = rng.randrange(6)
            if mutation == 0:
                doc["nodes"][rng.randrange(len(doc["nodes"]))].pop("id")
            elif mutation == 1:
                doc["segments"][rng.randrange(len(doc["segments"]))]["to"] = "nowhere"
            elif mutation == 2:
                doc["nodes"][rng.randrange(len(doc["nodes"]))]["pad_count"] = "many"
            elif mutation == 3:
                doc["nodes"].append(dict(doc["nodes"][0]))
            elif mutation == 4:
                doc["settings"]["mystery"] = 1
            else:
                doc["format"] = "skysim/0"
            path = tmp_path / f"mut{i}.json"
            path.write_text(json.dumps(doc))
            rc = main(["validate", "--network", str(path)])
            assert rc == 1
            assert capsys.readouterr().err.strip()

    def test_unknown_builtin_controller(self, fixture_files, capsys):
        network, scenario, tmp = fixture_files
        rc = main(["run", "--network", str(network), "--scenario", str(scenario),
                   "--out", str(tmp / "o"), "--controller", "builtin:wizard"])
        assert rc == 2
        assert "wizard" in capsys.readouterr().err

    def test_controller_spec_parsing(self):
        assert isinstance(build_controller("builtin:greedy"), InProcessController)
        assert isinstance(build_controller("tcp:127.0.0.1:7401"), TcpControllerServer)
        with pytest.raises(ValueError):
            build_controller("carrier-pigeon:coop")


def edit_client(net=None):
    app = create_app(network=net)
    return TestClient(app)


class TestEditEndpoints:
    def test_put_get_round_trip(self):
        client = edit_client()
        doc = save_network(ring(4))
        assert client.put("/network", content=doc).status_code == 200
        got = client.get("/network")
        assert got.status_code == 200
        assert got.content == doc

    def test_put_invalid_network_400(self):
        client = edit_client()
        assert client.put("/network", content=b"{bad").status_code == 400
        doc = json.loads(save_network(ring(4)))
        doc["segments"][0]["to"] = "ghost"
        resp = client.put("/network", content=json.dumps(doc).encode())
        assert resp.status_code == 400
        assert "ghost" in resp.json()["detail"]

    def test_node_segment_crud(self):
        client = edit_client()
        assert client.post("/network/nodes", json={"id": "a", "position": [0, 0, 10]}).status_code == 200
        assert client.post("/network/nodes", json={"id": "b", "position": [50, 0, 10]}).status_code == 200
        assert client.post("/network/nodes", json={"id": "a", "position": [1, 1, 1]}).status_code == 400
        assert client.post(
            "/network/segments", json={"id": "ab", "from": "a", "to": "b"}
        ).status_code == 200
        assert client.post(
            "/network/segments", json={"id": "xx", "from": "a", "to": "ghost"}
        ).status_code == 404
        assert client.patch("/network/nodes/a", json={"position": [5, 5, 12]}).status_code == 200
        got = json.loads(client.get("/network").content)
        node_a = next(n for n in got["nodes"] if n["id"] == "a")
        assert node_a["position"] == [5.0, 5.0, 12.0]
        assert client.patch("/network/segments/ab", json={"available": False}).status_code == 200
        got = json.loads(client.get("/network").content)
        assert got["segments"][0]["available"] is False
        # Cascade delete: node removal takes the segment with it.
        assert client.delete("/network/nodes/a").status_code == 200
        got = json.loads(client.get("/network").content)
        assert got["segments"] == []
        assert client.delete("/network/nodes/ghost").status_code == 404
        assert client.delete("/network/segments/ghost").status_code == 404

    def test_patch_settings_partial(self):
        client = edit_client(two_node_line())
        resp = client.patch("/settings", json={"dt_s": 0.2, "drone": {"cruise_speed_mps": 14.0}})
        assert resp.status_code == 200
        got = json.loads(client.get("/network").content)
        assert got["settings"]["dt_s"] == 0.2
        assert got["settings"]["drone"]["cruise_speed_mps"] == 14.0
        # Untouched fields survive the merge.
        assert got["settings"]["drone"]["battery_capacity_wh"] == 100.0
        assert client.patch("/settings", json={"mystery": 1}).status_code == 400


def start_body(origin="n0", destination="n3", speed=2000.0, faults=(), **extra):
    scenario = {
        "requests": [
            {"id": "r1", "origin": origin, "destination": destination, "payload_kg": 1.0,
             "swarm_size": 1, "release_time_s": 0}
        ],
        "faults": list(faults),
        "max_time_s": 3600,
        "seed": 42,
    }
    scenario.update(extra)
    return {"scenario": scenario, "controller": "builtin:greedy", "speed_multiplier": speed}


def wait_for_state(client, state, timeout=30.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        status = client.get("/sim/status").json()
        if status["state"] == state:
            return status
        if status["state"] == "aborted":
            raise AssertionError(f"run aborted: {status}")
        time.sleep(0.02)
    raise AssertionError(f"timed out waiting for state {state}")


class TestRuntimeEndpoints:
    def test_start_pauses_then_runs_to_completion(self):
        client = edit_client(ring(6))
        resp = client.post("/sim/start", json=start_body())
        assert resp.status_code == 200
        assert client.get("/sim/status").json()["state"] == "paused"
        # Edit mode is locked while the run is active.
        assert client.put("/network", content=save_network(ring(4))).status_code == 409
        assert client.post("/network/nodes", json={"id": "x", "position": [0, 0, 0]}).status_code == 409
        assert client.post("/sim/start", json=start_body()).status_code == 409
        assert client.post("/sim/resume").json()["ok"]
        wait_for_state(client, "finished")
        frames = client.get("/sim/export/frames.csv")
        events = client.get("/sim/export/events.csv")
        assert frames.status_code == 200 and events.status_code == 200
        assert b"complete" in events.content
        # Once finished, edit mode unlocks.
        assert client.put("/network", content=save_network(ring(6))).status_code == 200

    def test_speed_neutrality(self):
        client = edit_client(two_node_line(settings=SimSettings(hover_takeoff_s=0.0, hover_landing_s=0.0)))
        exports = []
        for speed in (200.0, 20000.0):
            assert client.post(
                "/sim/start", json={**start_body(origin="a", destination="b"), "speed_multiplier": speed}
            ).status_code == 200
            client.post("/sim/resume")
            wait_for_state(client, "finished")
            exports.append(
                (client.get("/sim/export/frames.csv").content,
                 client.get("/sim/export/events.csv").content)
            )
        assert exports[0] == exports[1]

    def test_speed_change_mid_run(self):
        client = edit_client(ring(6))
        client.post("/sim/start", json=start_body(speed=50.0))
        client.post("/sim/resume")
        assert client.post("/sim/speed", json={"multiplier": 5000.0}).status_code == 200
        assert client.post("/sim/speed", json={"multiplier": -1}).status_code == 400
        wait_for_state(client, "finished")

    def test_fault_injected_while_paused_reroutes(self):
        # Baseline: the greedy route n0->n3 goes s0,s1,s2 (lexicographic tie).
        client = edit_client(ring(6))
        client.post("/sim/start", json=start_body())
        client.post("/sim/resume")
        wait_for_state(client, "finished")
        baseline = client.get("/sim/export/events.csv").content.decode()
        assert ",segment_start,s0," in baseline
        # Now block s1 before releasing the run: the route flips direction.
        client.post("/sim/start", json=start_body())
        assert client.post("/sim/fault", json={"segment": "s1", "available": False}).status_code == 200
        assert client.post("/sim/fault", json={"segment": "zz", "available": False}).status_code == 404
        client.post("/sim/resume")
        wait_for_state(client, "finished")
        rerouted = client.get("/sim/export/events.csv").content.decode()
        assert ",segment_start,s1," not in rerouted
        assert ",segment_start,s5," in rerouted
        assert ",complete," in rerouted

    def test_pause_resume_mid_run(self):
        client = edit_client(ring(6))
        client.post("/sim/start", json=start_body(speed=300.0))
        client.post("/sim/resume")
        time.sleep(0.1)
        client.post("/sim/pause")
        status = client.get("/sim/status").json()
        if status["state"] != "finished":  # tiny runs may have finished already
            assert status["state"] == "paused"
            t_pause = status["time_s"]
            time.sleep(0.05)
            assert client.get("/sim/status").json()["time_s"] == t_pause
            client.post("/sim/speed", json={"multiplier": 5000.0})
            client.post("/sim/resume")
        wait_for_state(client, "finished")

    def test_no_session_conflicts(self):
        client = edit_client(ring(6))
        assert client.post("/sim/pause").status_code == 409
        assert client.post("/sim/resume").status_code == 409
        assert client.get("/sim/export/frames.csv").status_code == 409
        assert client.get("/sim/status").json()["state"] == "idle"

    def test_ws_stream_delivers_frames_and_events(self):
        client = edit_client(ring(6))
        client.post("/sim/start", json=start_body())
        with client.websocket_connect("/sim/stream") as ws:
            first = ws.receive_json()
            assert first["type"] == "status"
            client.post("/sim/resume")
            seen_types = set()
            for _ in range(400):
                msg = ws.receive_json()
                seen_types.add(msg["type"])
                if msg["type"] == "end":
                    break
                if {"frame", "event"} <= seen_types and msg["type"] == "status":
                    pass
            assert "frame" in seen_types
            assert "event" in seen_types
