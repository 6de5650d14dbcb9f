"""Run a config with method "both" over several seeds and tabulate both distances."""
import argparse
import json
import tempfile

from ngca.experiment import load_config, run_config, validate_config


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("config")
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    base = load_config(args.config).raw
    print("seed  entropy_descent  cumulant")
    for seed in range(args.seeds):
        raw = json.loads(json.dumps(base))
        raw["sampling"]["seed"] = seed
        raw["method"] = "both"
        with tempfile.TemporaryDirectory() as tmp:
            rep = run_config(validate_config(raw), tmp)
        print(f"{seed:4d}  {rep.distance('entropy_descent'):15.4f}  {rep.distance('cumulant'):8.4f}")


if __name__ == "__main__":
    main()
