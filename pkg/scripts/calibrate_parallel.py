"""Refit the parallel-coordinate band thresholds on the simulated corpus.

Runs the default manifest into a scratch directory, fits the Square cut on the
Petrosian dimension and the Sine/Triangle cut on permutation entropy over all
OUT1 series (both substrates), and rewrites the packaged calibration file.

    python scripts/calibrate_parallel.py [--manifest M] [--output PATH]
"""
from __future__ import annotations

import argparse
import json
import tempfile

from concrete_rc.classify import default_calibration_path, fit_thresholds
from concrete_rc.pipeline import clean_json, feature_table, load_manifest, run_pipeline, shape_of


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--manifest")
    ap.add_argument("--output", default=str(default_calibration_path()))
    args = ap.parse_args(argv)
    manifest = load_manifest(args.manifest)
    with tempfile.TemporaryDirectory() as tmp:
        run_pipeline(manifest, tmp)
        rows = [(shape_of(label).value.capitalize(), fv["petrosian_fd"], fv["perm_entropy"])
                for _, label, fv in feature_table(tmp)]
    th = fit_thresholds(rows)
    with open(args.output, "w") as fh:
        json.dump(clean_json(th.to_dict()), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(clean_json(th.to_dict()), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
