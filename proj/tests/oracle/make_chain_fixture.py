"""Freezes activation, seed and PPR values for the small chain fixture."""

import json
import os

import numpy as np

import reference as ref

HERE = os.path.dirname(os.path.abspath(__file__))

PASSAGES = [
    {"doc_key": "p0", "text": "Alder relates Birch."},
    {"doc_key": "p1", "text": "Birch relates Cedar. Cedar shines brightly."},
    {"doc_key": "p2", "text": "Cedar meets Dogwood. Alder waves at Cedar."},
    {"doc_key": "p3", "text": "Elm stands alone."},
]
TWO_HOP = [
    {"doc_key": "q0", "text": "Alder quietly relates to Birch today."},
    {"doc_key": "q1", "text": "Birch loudly relates to Cedar now."},
    {"doc_key": "q2", "text": "Dogwood grows far away."},
]
QUERY = "Alder relates"
DIM, SEED = 64, 11


def main():
    cfg = ref.Cfg(threshold=0.5, delta=0.05, max_hops=4, lam=0.05)
    g = ref.build(PASSAGES)
    qv = ref.hash_encode(QUERY, DIM, SEED)
    ent_s = ref.sims(qv, g["entities"], DIM, SEED)
    a0 = np.where(ent_s > cfg.threshold, ent_s, 0.0)
    a, hops = ref.activate(g, qv, cfg, DIM, SEED)
    # per-hop snapshots
    snaps = []
    for h in range(0, 5):
        c = ref.Cfg(**{**cfg.__dict__, "max_hops": h})
        ah, _ = ref.activate(g, qv, c, DIM, SEED)
        snaps.append([float(x) for x in ah])
    psims = ref.sims(qv, g["passages"], DIM, SEED)
    seeds = ref.seeds(g, a, psims, cfg)
    I = ref.ppr_dense(g["C"], seeds, a, cfg.damping)
    out = {
        "passages": PASSAGES, "query": QUERY, "dim": DIM, "seed": SEED,
        "config": {"entity_sim_threshold": cfg.threshold, "delta": cfg.delta,
                   "max_hops": cfg.max_hops, "lambda": cfg.lam},
        "entities": g["entities"],
        "sentence_sims": [float(x) for x in ref.sims(qv, [t for _, t in g["sentences"]], DIM, SEED)],
        "entity_sims": [float(x) for x in ent_s],
        "initial_activation": [float(x) for x in a0],
        "activation_by_hop_cap": snaps,
        "final_activation": [float(x) for x in a],
        "hops": hops,
        "passage_sims": [float(x) for x in psims],
        "passage_seeds": [float(x) for x in seeds],
        "importance": [float(x) for x in I],
    }
    # two-passage chain: terminates after exactly two productive hops
    g2 = ref.build(TWO_HOP)
    q2 = ref.hash_encode(QUERY, DIM, SEED)
    c2 = ref.Cfg(threshold=0.5, delta=0.0, max_hops=4)
    by_cap = []
    for h in range(0, 5):
        ah, hh = ref.activate(g2, q2, ref.Cfg(**{**c2.__dict__, "max_hops": h}), DIM, SEED)
        by_cap.append({"activation": [float(x) for x in ah], "hops": hh})
    out["two_hop"] = {
        "passages": TWO_HOP,
        "entities": g2["entities"],
        "sentence_sims": [float(x) for x in ref.sims(q2, [t for _, t in g2["sentences"]], DIM, SEED)],
        "by_hop_cap": by_cap,
    }
    print(json.dumps({k: out[k] for k in ("entities", "initial_activation", "final_activation", "hops", "passage_seeds")}, indent=None))
    with open(os.path.join(HERE, "..", "data", "chain_fixture.json"), "w", encoding="utf-8") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
