#!/usr/bin/env python3
"""Reference external controller for the skysim line protocol.

Connects to a listening engine (`skysim run --controller tcp:HOST:PORT`),
answers every arrival with a greedy minimum-energy policy, and exits cleanly
when the engine sends `end`. Everything is recomputed locally from the
`hello` document — the energy model, the climb-angle geometry, and the path
search — so this client doubles as a cross-implementation check of the
engine's built-in controller: their event logs must match exactly.

Copy this file as the starting point for your own routing algorithm; the
only contract is one JSON object per line, one decision per arrival.
"""

from __future__ import annotations

import argparse
import heapq
import itertools
import json
import math
import socket
import sys
import time

PROTOCOL_VERSION = 1
WH_PER_JOULE = 1.0 / 3600.0


# ---------------------------------------------------------------------------
# Power model (momentum-theory induced velocity + parasite drag)


def solve_induced_velocity(thrust: float, airspeed: float, rho: float, area: float) -> float:
    target = thrust / (2.0 * rho * area)
    if target == 0.0:
        return 0.0
    v = airspeed
    v_h = math.sqrt(target)

    def residual(x: float) -> float:
        return x * math.sqrt(v * v + x * x) - target

    lo, hi = 0.0, v_h
    for _ in range(48):
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(8):
        hyp = math.sqrt(v * v + x * x)
        slope = hyp + x * x / hyp
        step = residual(x) / slope
        x -= step
        if abs(step) <= 1e-16 * max(1.0, x):
            break
    x = min(max(x, 0.0), v_h)
    if abs(residual(x)) > 1e-9 * max(1.0, target):
        raise RuntimeError(f"induced-velocity solve failed (T={thrust}, v={airspeed})")
    return x


def electric_power(drone: dict, env: dict, v: float, theta: float, mass: float) -> float:
    rho = env["air_density_kgpm3"]
    g = env["gravity_mps2"]
    drag = 0.5 * rho * drone["drag_coefficient"] * drone["frontal_area_m2"] * v * v
    weight = mass * g
    thrust = math.hypot(weight + drag * math.sin(theta), drag * math.cos(theta))
    disc_area = drone["rotor_count"] * drone["rotor_disc_area_m2"]
    v_i = solve_induced_velocity(thrust, v, rho, disc_area)
    p_mech = (
        drone["induced_power_factor"] * thrust * v_i
        + weight * v * math.sin(theta)
        + drag * v
    )
    return max(0.0, p_mech) / drone["powertrain_efficiency"] + drone["avionics_power_w"]


def total_mass(drone: dict, payload_kg: float) -> float:
    return (drone["mass_frame_kg"] + drone["mass_battery_kg"]) + payload_kg


def segment_energy(drone: dict, env: dict, legs: list, payload_kg: float,
                   hover_takeoff_s: float, hover_landing_s: float) -> float:
    mass = total_mass(drone, payload_kg)
    speed = drone["cruise_speed_mps"]
    total = 0.0
    for length, theta in legs:
        duration = length / speed
        power = electric_power(drone, env, speed, theta, mass)
        total += power * duration * WH_PER_JOULE
    hover_s = hover_takeoff_s + hover_landing_s
    if hover_s > 0:
        p_hover = electric_power(drone, env, 0.0, 0.0, mass)
        total += p_hover * hover_s * WH_PER_JOULE
    return total


# ---------------------------------------------------------------------------
# Network view built from the hello document


def _dist(a, b):
    return math.sqrt((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2 + (b[2] - a[2]) ** 2)


class NetworkView:
    def __init__(self, doc: dict):
        self.positions = {n["id"]: tuple(n["position"]) for n in doc["nodes"]}
        self.segments = doc["segments"]  # canonical documents are id-sorted
        self.availability = {s["id"]: bool(s["available"]) for s in self.segments}
        self.incident = {}
        for seg in self.segments:
            self.incident.setdefault(seg["from"], []).append(seg)
            self.incident.setdefault(seg["to"], []).append(seg)

    def set_available(self, segment_id: str, available: bool) -> None:
        self.availability[segment_id] = available

    def leg_profiles(self, seg: dict, origin: str) -> list:
        points = [self.positions[seg["from"]]]
        points.extend(tuple(w) for w in seg["waypoints"])
        points.append(self.positions[seg["to"]])
        if origin == seg["to"]:
            points = points[::-1]
        legs = []
        for a, b in zip(points, points[1:]):
            horizontal = math.hypot(b[0] - a[0], b[1] - a[1])
            dz = b[2] - a[2]
            legs.append((_dist(a, b), math.atan2(dz, horizontal)))
        return legs


# ---------------------------------------------------------------------------
# Greedy policy


class GreedyController:
    """Recompute the cheapest feasible route at every arrival."""

    def __init__(self):
        self.net: NetworkView | None = None
        self.settings: dict = {}
        self.destinations: dict[str, str] = {}
        self.reserve = 0.0
        self.capacity = 0.0

    def handle(self, message: dict) -> dict | None:
        mtype = message.get("type")
        if mtype == "hello":
            self.net = NetworkView(message["network"])
            self.settings = message["settings"]
            self.reserve = self.settings["reserve_fraction"]
            self.capacity = self.settings["drone"]["battery_capacity_wh"]
            self.destinations = {
                req["id"]: req["destination"] for req in message["requests"]
            }
            return {"type": "ready", "protocol_version": PROTOCOL_VERSION}
        if mtype == "fault":
            self.net.set_available(message["segment"], message["available"])
            return None
        if mtype == "arrival":
            return self.decide(message)
        # rejection / error / end need no answer
        return None

    def decide(self, arrival: dict) -> dict:
        swarm_id = arrival.get("swarm_id")
        request_id = swarm_id if swarm_id else arrival["drone_id"].rsplit("-", 1)[0]
        destination = self.destinations[request_id]
        node = arrival["node_id"]
        if node == destination:
            return self._reply(arrival, action="complete")
        first = self.cheapest_first_hop(node, destination, arrival["payload_kg"])
        if first is None:
            return self._reply(arrival, action="wait", duration_s=30.0)
        segment_id, energy = first
        required = energy * (1.0 + self.reserve)
        if arrival["soc_wh"] < required:
            return self._reply(arrival, action="charge", target_wh=required)
        return self._reply(arrival, action="traverse", segment=segment_id)

    def _reply(self, arrival: dict, **fields) -> dict:
        decision = {"type": "decision"}
        if arrival.get("swarm_id"):
            decision["swarm_id"] = arrival["swarm_id"]
        else:
            decision["drone_id"] = arrival["drone_id"]
        decision.update(fields)
        return decision

    def cheapest_first_hop(self, origin: str, destination: str, payload_kg: float):
        """Dijkstra over (energy, hop count, id sequence); returns the first
        step of the optimum, or None when the destination is unreachable."""
        drone = self.settings["drone"]
        env = self.settings["environment"]
        hover_t = self.settings["hover_takeoff_s"]
        hover_l = self.settings["hover_landing_s"]
        usable = self.capacity * (1.0 - self.reserve)

        weights = {}
        for seg in self.net.segments:
            if not self.net.availability.get(seg["id"], False):
                continue
            for node_id in (seg["from"], seg["to"]):
                legs = self.net.leg_profiles(seg, node_id)
                weights[(seg["id"], node_id)] = segment_energy(
                    drone, env, legs, payload_kg, hover_t, hover_l
                )

        counter = itertools.count()
        heap = [(0.0, 0, (), next(counter), origin, ())]
        settled = set()
        while heap:
            energy, hops, seq, _, node, steps = heapq.heappop(heap)
            if node in settled:
                continue
            settled.add(node)
            if node == destination:
                if not steps:
                    return None
                return steps[0]
            for seg in self.net.incident.get(node, []):
                key = (seg["id"], node)
                if key not in weights:
                    continue
                weight = weights[key]
                if weight > usable:
                    continue
                nxt = seg["to"] if node == seg["from"] else seg["from"]
                if nxt in settled:
                    continue
                heapq.heappush(
                    heap,
                    (
                        energy + weight,
                        hops + 1,
                        seq + (seg["id"],),
                        next(counter),
                        nxt,
                        steps + ((seg["id"], weight),),
                    ),
                )
        return None


# ---------------------------------------------------------------------------
# Line-oriented client loop


def connect(host: str, port: int, timeout_s: float = 15.0) -> socket.socket:
    deadline = time.time() + timeout_s
    while True:
        try:
            return socket.create_connection((host, port), timeout=60)
        except OSError:
            if time.time() >= deadline:
                raise
            time.sleep(0.05)


def run_controller(host: str, port: int, verbose: bool = False) -> int:
    sock = connect(host, port)
    reader = sock.makefile("rb")
    controller = GreedyController()
    try:
        for line in reader:
            message = json.loads(line)
            if verbose:
                print(f"<- {message.get('type')}", file=sys.stderr)
            reply = controller.handle(message)
            if reply is not None:
                sock.sendall((json.dumps(reply) + "\n").encode("utf-8"))
                if verbose:
                    print(f"-> {reply.get('action', reply['type'])}", file=sys.stderr)
            if message.get("type") == "end":
                break
        return 0
    finally:
        sock.close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="Greedy reference controller for a skysim engine"
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=7401)
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    try:
        return run_controller(args.host, args.port, verbose=args.verbose)
    except OSError as exc:
        print(f"refctl: cannot reach engine at {args.host}:{args.port}: {exc}",
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
