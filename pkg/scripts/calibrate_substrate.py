"""Evaluate substrate parameter sets on the default stimulus corpus.

For each candidate readout setting this prints the smallest undoped and the
largest doped DFA exponent on OUT1, the worst ADF p-value over every analysis
window and the tree-A labels. ``--seed-scan`` instead sweeps base seeds of
the shipped parameter files and reports the fraction whose windows all reject
a unit root.

    python scripts/calibrate_substrate.py
    python scripts/calibrate_substrate.py --seed-scan undoped --seeds 100 160
"""
from __future__ import annotations

import argparse
import itertools

from concrete_rc.classify import build_ledger, decision_tree_a
from concrete_rc.metrics import dfa, katz_fd, permutation_entropy, petrosian_fd
from concrete_rc.pipeline import load_manifest, stimulus_seed
from concrete_rc.prep import adf_test, normalize
from concrete_rc.reservoir import SubstrateKind, default_params, simulate
from concrete_rc.signals import synthesize

GRID = {
    "undoped_corner_hz": (1500, 3000, 5000),
    "undoped_sigma": (0.05, 0.1),
    "doped_corner_hz": (4000, 5000, 8000),
    "doped_sigma": (8.0, 10.0),
}


def corpus(manifest):
    n, dt = manifest.n_samples, manifest.dt
    probe = synthesize(manifest.probe, dt, n)
    return probe, [(i, s, synthesize(s, dt, n)) for i, s in enumerate(manifest.stimuli)]


def windows(manifest, params, probe, stimuli):
    """Yield (spec, terminal, raw window) for every stimulus and terminal."""
    for i, spec, second in stimuli:
        outs = simulate(probe, second, params.replace(seed=stimulus_seed(params.seed, i)))
        for terminal in ("out1", "out2"):
            yield spec, terminal, getattr(outs, terminal).window(
                manifest.settle_samples, manifest.window)


def evaluate(manifest, und, dop, probe, stimuli) -> dict:
    values, worst_p = {}, 0.0
    for kind, params in (("u", und), ("d", dop)):
        for spec, terminal, w in windows(manifest, params, probe, stimuli):
            worst_p = max(worst_p, adf_test(w).p_value)
            z = normalize(w)
            values[kind, spec.label, terminal] = {
                "alpha": dfa(z).value, "perm_entropy": permutation_entropy(z),
                "katz_fd": katz_fd(z), "petrosian_fd": petrosian_fd(z)}
    labels = {}
    for shape in sorted({s.shape for _, s, _ in stimuli}, key=lambda s: s.value):
        pairs = {}
        for _, spec, _ in stimuli:
            if spec.shape is not shape:
                continue
            u, d = values["u", spec.label, "out1"], values["d", spec.label, "out1"]
            for name in ("perm_entropy", "katz_fd"):
                pairs[spec.frequency, name] = (u[name], d[name])
            pairs[spec.frequency, "petrosian_fd_out1"] = (u["petrosian_fd"], d["petrosian_fd"])
        labels[shape.value] = decision_tree_a(build_ledger(pairs, manifest.epsilon_rel)).value
    return {
        "min_undoped_alpha": min(v["alpha"] for k, v in values.items() if k[0] == "u" and k[2] == "out1"),
        "max_doped_alpha": max(v["alpha"] for k, v in values.items() if k[0] == "d" and k[2] == "out1"),
        "worst_adf_p": worst_p,
        "labels": labels,
    }


def grid(manifest) -> None:
    probe, stimuli = corpus(manifest)
    und0 = default_params(SubstrateKind.UNDOPED)
    dop0 = default_params(SubstrateKind.DOPED)
    for uc, us, dc, ds in itertools.product(*GRID.values()):
        und = und0.replace(output_corner_hz=uc, noise_sigma=us)
        dop = dop0.replace(output_corner_hz=dc, noise_sigma=ds)
        r = evaluate(manifest, und, dop, probe, stimuli)
        print(f"undoped {uc:>5} Hz sigma {us:<4}  doped {dc:>5} Hz sigma {ds:<4}  "
              f"alpha_u>={r['min_undoped_alpha']:.3f} alpha_d<={r['max_doped_alpha']:.3f} "
              f"adf_p<={r['worst_adf_p']:.3f}  {r['labels']}")


def seed_scan(manifest, kind: SubstrateKind, lo: int, hi: int) -> None:
    probe, stimuli = corpus(manifest)
    base = default_params(kind)
    passed = 0
    for seed in range(lo, hi):
        worst = max(adf_test(w).p_value
                    for _, _, w in windows(manifest, base.replace(seed=seed), probe, stimuli))
        passed += worst < 0.05
        print(f"seed {seed}: worst ADF p = {worst:.4f}")
    print(f"{passed}/{hi - lo} seeds reject a unit root on every window")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--manifest")
    ap.add_argument("--seed-scan", type=SubstrateKind, choices=list(SubstrateKind))
    ap.add_argument("--seeds", type=int, nargs=2, default=(100, 160))
    args = ap.parse_args(argv)
    manifest = load_manifest(args.manifest)
    if args.seed_scan is None:
        grid(manifest)
    else:
        seed_scan(manifest, args.seed_scan, *args.seeds)


if __name__ == "__main__":
    main()
