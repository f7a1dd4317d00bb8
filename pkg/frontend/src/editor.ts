/** Edit-mode logic: a local working copy of the network plus guard checks
 * that mirror the server's validation, so clicks that would 4xx are refused
 * client-side with a human message instead.
 */

import type { NetworkDoc, NodeDoc, SegmentDoc, Vec3 } from "./types.js";

export interface GuardResult {
  ok: boolean;
  reason?: string;
}

const ID_RE = /^[A-Za-z0-9_-]+$/;

export function guardNodeId(net: NetworkDoc, id: string): GuardResult {
  if (!ID_RE.test(id)) {
    return { ok: false, reason: "ids are letters, digits, '-' and '_'" };
  }
  if (net.nodes.some((n) => n.id === id)) {
    return { ok: false, reason: `node '${id}' already exists` };
  }
  return { ok: true };
}

export function guardSegment(
  net: NetworkDoc,
  from: string,
  to: string,
  waypoints: Vec3[] = [],
): GuardResult {
  if (from === to) {
    return { ok: false, reason: "a segment cannot connect a node to itself" };
  }
  const a = net.nodes.find((n) => n.id === from);
  const b = net.nodes.find((n) => n.id === to);
  if (!a || !b) {
    return { ok: false, reason: "both endpoints must exist" };
  }
  const run = [a.position, ...waypoints, b.position];
  for (let i = 0; i + 1 < run.length; i++) {
    if (
      run[i][0] === run[i + 1][0] &&
      run[i][1] === run[i + 1][1] &&
      run[i][2] === run[i + 1][2]
    ) {
      return { ok: false, reason: "zero-length leg" };
    }
  }
  const duplicate = net.segments.some((s) => {
    const samePair =
      (s.from === from && s.to === to) || (s.from === to && s.to === from);
    if (!samePair) {
      return false;
    }
    const theirs = s.from === from ? s.waypoints : [...s.waypoints].reverse();
    return (
      theirs.length === waypoints.length &&
      theirs.every((w, i) => w.every((c, k) => c === waypoints[i][k]))
    );
  });
  if (duplicate) {
    return { ok: false, reason: "an identical segment already exists" };
  }
  return { ok: true };
}

export function guardMoveNode(net: NetworkDoc, id: string, position: Vec3): GuardResult {
  if (position[2] < 0) {
    return { ok: false, reason: "altitude must be >= 0" };
  }
  for (const seg of net.segments) {
    if (seg.from !== id && seg.to !== id) {
      continue;
    }
    const a = seg.from === id ? position : nodePosition(net, seg.from);
    const b = seg.to === id ? position : nodePosition(net, seg.to);
    const run = [a, ...seg.waypoints, b];
    for (let i = 0; i + 1 < run.length; i++) {
      if (
        run[i][0] === run[i + 1][0] &&
        run[i][1] === run[i + 1][1] &&
        run[i][2] === run[i + 1][2]
      ) {
        return { ok: false, reason: `move collapses a leg of '${seg.id}'` };
      }
    }
  }
  return { ok: true };
}

function nodePosition(net: NetworkDoc, id: string): Vec3 {
  const node = net.nodes.find((n) => n.id === id);
  if (!node) {
    throw new Error(`unknown node '${id}'`);
  }
  return node.position;
}

export function nextId(net: NetworkDoc, prefix: "n" | "s"): string {
  const taken = new Set([
    ...net.nodes.map((n) => n.id),
    ...net.segments.map((s) => s.id),
  ]);
  let k = taken.size;
  while (taken.has(`${prefix}${k}`)) {
    k += 1;
  }
  return `${prefix}${k}`;
}

/** Pure local mutations used for optimistic rendering; the server copy is
 * refreshed after every accepted call, so these never drift from truth. */
export function withNode(net: NetworkDoc, node: NodeDoc): NetworkDoc {
  return { ...net, nodes: [...net.nodes, node].sort((x, y) => x.id.localeCompare(y.id)) };
}

export function withSegment(net: NetworkDoc, segment: SegmentDoc): NetworkDoc {
  return {
    ...net,
    segments: [...net.segments, segment].sort((x, y) => x.id.localeCompare(y.id)),
  };
}

export function withoutNode(net: NetworkDoc, id: string): NetworkDoc {
  return {
    ...net,
    nodes: net.nodes.filter((n) => n.id !== id),
    segments: net.segments.filter((s) => s.from !== id && s.to !== id),
  };
}

export function withoutSegment(net: NetworkDoc, id: string): NetworkDoc {
  return { ...net, segments: net.segments.filter((s) => s.id !== id) };
}

export function withNodePosition(net: NetworkDoc, id: string, position: Vec3): NetworkDoc {
  return {
    ...net,
    nodes: net.nodes.map((n) => (n.id === id ? { ...n, position } : n)),
  };
}

export function withAvailability(net: NetworkDoc, id: string, available: boolean): NetworkDoc {
  return {
    ...net,
    segments: net.segments.map((s) => (s.id === id ? { ...s, available } : s)),
  };
}

/** Networks are semantically equal when canonical JSON matches field-wise
 * (element order is already canonical: the gateway sorts by id). */
export function sameNetwork(a: NetworkDoc, b: NetworkDoc): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

export function exportBlob(net: NetworkDoc): string {
  return JSON.stringify(net, null, 2);
}

export function importDocument(text: string): NetworkDoc {
  const doc = JSON.parse(text) as NetworkDoc;
  if (doc.format !== "skysim/1") {
    throw new Error(`unsupported format '${doc.format}'`);
  }
  return doc;
}
