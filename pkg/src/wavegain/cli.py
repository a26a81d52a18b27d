"""Command-line entry points: self-verification, gradient checks, impulse
galleries, correlation-DOF estimation, benchmarking, and the CIFAR
train/eval experiments.

Every subcommand validates its configuration first, writes all outputs under
``--out-dir`` and embeds the fully resolved configuration, package version
and seeds into ``manifest.json`` there, so a rerun with the same manifest
reproduces the outputs bit-exactly in deterministic mode.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import ConfigError, DataError, VerificationError, save_json
from .data import (check_cifar_files, load_cifar, subsample_per_class,
                   synthetic_dataset)
from .filters import load_filter_set
from .gainlayer import (corr_dof_reference, dof_from_correlations,
                        random_scale2_shapes, spectral_ring_fractions)
from .nn import (Model, TrainConfig, build_model, evaluate, train)
from .transform import LayerCostSpec, mac_count
from .verify import gainlayer_suite, gradcheck_suite, transform_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_IO = 4


def _version_string() -> str:
    try:
        rev = subprocess.run(["git", "rev-parse", "--short", "HEAD"],
                             capture_output=True, text=True, timeout=5)
        git = rev.stdout.strip() if rev.returncode == 0 else "nogit"
    except Exception:
        git = "nogit"
    return f"wavegain {__version__} ({git})"


def _write_manifest(out_dir: Path, command: str, config: dict,
                    outputs: list[str], seeds=None) -> None:
    save_json(out_dir / "manifest.json", {
        "command": command,
        "config": config,
        "version": _version_string(),
        "seeds": seeds if seeds is not None else config.get("seed"),
        "outputs": sorted(outputs),
    })


def _load_config_file(path) -> dict:
    p = Path(path)
    if not p.exists():
        raise DataError(f"missing config file: {p}")
    try:
        cfg = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {p} is not valid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config file must hold a JSON object")
    return cfg


def _apply_config_defaults(args, parser, argv) -> None:
    """Values from --config JSON fill in flags the user did not pass."""
    if not getattr(args, "config", None):
        return
    cfg = _load_config_file(args.config)
    passed = {a.lstrip("-").split("=")[0].replace("-", "_")
              for a in argv if a.startswith("--")}
    for key, val in cfg.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"config key {key!r} is not a valid option")
        if attr not in passed:
            setattr(args, attr, val)


def _pgm_write(path: Path, img: np.ndarray) -> None:
    """8-bit binary PGM with per-image min/max normalization."""
    lo = float(img.min())
    hi = float(img.max())
    scale = 255.0 / (hi - lo) if hi > lo else 0.0
    data = np.clip((img - lo) * scale, 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{data.shape[1]} {data.shape[0]}\n255\n".encode())
        fh.write(data.tobytes())


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def cmd_selftest(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    filter_set = args.filter_set
    if args.corrupt_filters:
        # fault-injection hook: perturb a filter table copy and make sure
        # the verification suite notices
        import wavegain.filters as filt
        fs = load_filter_set(filter_set)
        bad_h0 = fs.level1.h0.copy()
        bad_h0[0] += 1e-3
        bad = filt.FilterSet(
            name="corrupted", level1=filt.Level1Filters(
                h0=bad_h0, h1=fs.level1.h1, g0=fs.level1.g0, g1=fs.level1.g1),
            qshift=fs.qshift)
        filt.load_filter_set.cache_clear()
        filt._FILTER_SETS["corrupted"] = ("near_sym_a", "qshift_a")
        original = filt.load_filter_set

        def patched(name="near_sym_a"):
            return bad
        filt.load_filter_set = patched
        try:
            results = transform_suite(args.seed, args.trials, "corrupted")
        finally:
            filt.load_filter_set = original
            filt._FILTER_SETS.pop("corrupted", None)
    else:
        results = transform_suite(args.seed, args.trials, filter_set)
        results += gainlayer_suite(args.seed, filter_set)
    rows = [r.to_dict() for r in results]
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        width = max(len(r.name) for r in results)
        for r in results:
            status = "ok  " if r.passed else "FAIL"
            print(f"{status} {r.name:<{width}}  value {r.value:.3e}  "
                  f"threshold {r.threshold:.3e}  {r.note}")
    save_json(out_dir / "selftest.json", rows)
    _write_manifest(out_dir, "selftest", {
        "seed": args.seed, "trials": args.trials, "filter_set": filter_set,
        "corrupt_filters": bool(args.corrupt_filters),
    }, ["selftest.json"])
    if not all(r.passed for r in results):
        failed = ", ".join(r.name for r in results if not r.passed)
        print(f"verification failed: {failed}", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = gradcheck_suite(args.layer, args.precision, args.seed)
    rows = [r.to_dict() for r in results]
    for r in results:
        status = "ok  " if r.passed else "FAIL"
        print(f"{status} {r.name}  worst rel err {r.value:.3e}  "
              f"threshold {r.threshold:.1e}")
    save_json(out_dir / "gradcheck.json", rows)
    _write_manifest(out_dir, "gradcheck", {
        "seed": args.seed, "layer": args.layer, "precision": args.precision,
    }, ["gradcheck.json"])
    if not all(r.passed for r in results):
        return EXIT_VERIFY
    return EXIT_OK


def cmd_impulse(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.size % 2 == 0:
        raise ConfigError("--size must be odd")
    shapes, coeffs = random_scale2_shapes(
        args.num_shapes, args.seed, size=args.size, levels=2,
        filter_set=args.filter_set)
    fractions = spectral_ring_fractions(shapes, args.size)
    grids = shapes.reshape(-1, args.size, args.size)
    outputs = []
    np.save(out_dir / "impulses.npy", grids)
    outputs.append("impulses.npy")
    for i, grid in enumerate(grids):
        name = f"impulse_{i:03d}.pgm"
        _pgm_write(out_dir / name, grid)
        outputs.append(name)
    with open(out_dir / "ring_energy.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["shape", "ring_energy_fraction"])
        for i, f in enumerate(fractions):
            w.writerow([i, f"{f:.6f}"])
    outputs.append("ring_energy.csv")
    _write_manifest(out_dir, "impulse", {
        "seed": args.seed, "num_shapes": args.num_shapes, "size": args.size,
        "filter_set": args.filter_set,
        "scale2_gain_scalars_per_shape": coeffs.shape[1],
        "gain_scalars": [list(map(float, row)) for row in coeffs],
    }, outputs)
    print(f"{args.num_shapes} shapes -> {out_dir}; ring energy "
          f"min {fractions.min():.3f} mean {fractions.mean():.3f}")
    return EXIT_OK


def cmd_corrdof(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.synthetic_d:
        dof = corr_dof_reference(args.synthetic_d, args.num_shapes, args.seed)
        result = {"mode": "synthetic", "dimension": args.synthetic_d,
                  "num_vectors": args.num_shapes, "dof": dof}
        rho = None
        print(f"synthetic d={args.synthetic_d}: estimated dof {dof:.2f}")
    else:
        shapes, _ = random_scale2_shapes(args.num_shapes, args.seed,
                                         size=args.size,
                                         filter_set=args.filter_set)
        dof, rho = dof_from_correlations(shapes)
        result = {"mode": "shapes", "num_shapes": args.num_shapes,
                  "size": args.size, "dof": dof,
                  "rho_std": float(np.std(rho))}
        print(f"{args.num_shapes} shapes: estimated correlation dof {dof:.2f}")
    outputs = ["corrdof.json"]
    save_json(out_dir / "corrdof.json", result)
    if rho is not None:
        hist, edges = np.histogram(rho, bins=args.bins, range=(-1.0, 1.0))
        with open(out_dir / "rho_histogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_left", "bin_right", "count"])
            for i, count in enumerate(hist):
                w.writerow([f"{edges[i]:.6f}", f"{edges[i+1]:.6f}", count])
        outputs.append("rho_histogram.csv")
    _write_manifest(out_dir, "corrdof", {
        "seed": args.seed, "num_shapes": args.num_shapes, "size": args.size,
        "filter_set": args.filter_set, "synthetic_d": args.synthetic_d,
        "bins": args.bins,
    }, outputs)
    return EXIT_OK


def _load_dataset(args):
    if args.dataset == "synthetic":
        train_ds = synthetic_dataset(args.train_size, 10, seed=11)
        test_ds = synthetic_dataset(max(args.train_size // 2, 50), 10,
                                    seed=13)
        return train_ds, test_ds
    if not args.data_dir:
        raise ConfigError("--data-dir is required for CIFAR datasets")
    if args.download_check:
        problems = check_cifar_files(args.data_dir, args.dataset)
        if problems:
            raise DataError("; ".join(problems))
    train_full, test_full = load_cifar(args.data_dir, args.dataset)
    if args.train_size and args.train_size < len(train_full):
        train_ds, test_ds = subsample_per_class(
            train_full, args.train_size, seed=args.subsample_seed,
            companion=test_full)
    else:
        train_ds, test_ds = train_full, test_full
    return train_ds, test_ds


def _save_checkpoint(d: Path, model_name: str, num_classes: int,
                     precision: str, params, seed: int,
                     final_val_acc: float) -> None:
    d.mkdir(parents=True, exist_ok=True)
    names = []
    for li, layer in enumerate(params):
        for pi, p in enumerate(layer):
            name = f"param_{li:02d}_{pi}.npy"
            np.save(d / name, p)
            names.append(name)
    save_json(d / "checkpoint.json", {
        "model": model_name, "num_classes": num_classes,
        "precision": precision, "seed": seed,
        "final_val_acc": final_val_acc, "params": names,
    })


def load_checkpoint(d) -> tuple[Model, list, dict]:
    d = Path(d)
    man = json.loads((d / "checkpoint.json").read_text())
    model = Model(build_model(man["model"], man["num_classes"],
                              precision=man["precision"]))
    params = []
    current = []
    last_li = 0
    for name in man["params"]:
        li = int(name.split("_")[1])
        while li > last_li:
            params.append(current)
            current = []
            last_li += 1
        current.append(np.load(d / name))
    params.append(current)
    # pad out trailing parameterless layers
    while len(params) < len(model.config.layers) - 1:
        params.append([])
    return model, params, man


def cmd_train(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.model not in ("lenet", "wavelenet"):
        raise ConfigError(f"unknown model {args.model!r}")
    if args.dataset not in ("cifar10", "cifar100", "synthetic"):
        raise ConfigError(f"unknown dataset {args.dataset!r}")
    num_classes = {"cifar10": 10, "cifar100": 100, "synthetic": 10}[args.dataset]
    train_ds, test_ds = _load_dataset(args)
    seeds = list(range(args.seeds)) if isinstance(args.seeds, int) \
        else [int(s) for s in args.seeds]
    finals = []
    outputs = []
    for seed in seeds:
        cfg = TrainConfig(epochs=args.epochs, lr=args.lr,
                          weight_decay=args.weight_decay,
                          batch_size=args.batch_size, seed=seed,
                          precision=args.precision,
                          deterministic=args.deterministic)
        model = Model(build_model(args.model, num_classes,
                                  precision=args.precision))
        t0 = time.perf_counter()

        def progress(epoch, metrics):
            if args.verbose and (epoch % 10 == 0 or epoch == cfg.epochs - 1):
                print(f"  seed {seed} epoch {epoch:3d} "
                      f"loss {metrics.train_loss[-1]:.4f} "
                      f"val {metrics.val_acc[-1]:.4f}", flush=True)

        metrics, params = train(model, train_ds, test_ds, cfg,
                                progress=progress)
        name = f"metrics_seed{seed}.csv"
        with open(out_dir / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_loss", "train_acc", "val_acc"])
            for row in metrics.rows():
                w.writerow([row[0], f"{row[1]:.6f}", f"{row[2]:.6f}",
                            f"{row[3]:.6f}"])
        outputs.append(name)
        _save_checkpoint(out_dir / f"checkpoint_seed{seed}", args.model,
                         num_classes, args.precision, params, seed,
                         metrics.val_acc[-1])
        outputs.append(f"checkpoint_seed{seed}/checkpoint.json")
        finals.append(metrics.val_acc[-1])
        print(f"seed {seed}: final val acc {metrics.val_acc[-1]:.4f} "
              f"({time.perf_counter() - t0:.1f}s)")
    summary = {
        "model": args.model, "dataset": args.dataset,
        "train_size": args.train_size, "epochs": args.epochs,
        "seeds": seeds, "final_val_acc": finals,
        "mean_val_acc": float(np.mean(finals)),
        "std_val_acc": float(np.std(finals)),
    }
    save_json(out_dir / "summary.json", summary)
    outputs.append("summary.json")
    _write_manifest(out_dir, "train", {
        "model": args.model, "dataset": args.dataset,
        "data_dir": str(args.data_dir), "train_size": args.train_size,
        "epochs": args.epochs, "lr": args.lr,
        "weight_decay": args.weight_decay, "batch_size": args.batch_size,
        "precision": args.precision, "deterministic": args.deterministic,
        "subsample_seed": args.subsample_seed,
    }, outputs, seeds=seeds)
    print(f"mean final val acc {summary['mean_val_acc']:.4f} "
          f"+- {summary['std_val_acc']:.4f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model, params, man = load_checkpoint(args.checkpoint)
    _, test_ds = _load_dataset(args)
    acc = evaluate(model, params, test_ds, batch_size=args.batch_size)
    result = {"checkpoint": str(args.checkpoint), "accuracy": acc,
              "logged_final_val_acc": man.get("final_val_acc")}
    save_json(out_dir / "eval.json", result)
    _write_manifest(out_dir, "eval", {
        "checkpoint": str(args.checkpoint), "dataset": args.dataset,
        "data_dir": str(args.data_dir), "batch_size": args.batch_size,
        "train_size": args.train_size,
    }, ["eval.json"])
    print(f"accuracy {acc:.4f} (checkpoint logged "
          f"{man.get('final_val_acc')})")
    return EXIT_OK


def cmd_bench(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    channel_grid = [int(c) for c in args.channels.split(",")]
    rows = []
    for c in channel_grid:
        for f in channel_grid:
            spec = LayerCostSpec(in_channels=c, out_channels=f,
                                 levels=args.levels, lowpass_size=3,
                                 conv_kernel=args.kernel)
            counts = mac_count(spec)
            row = {"C": c, "F": f, **counts}
            if args.timing:
                from .gainlayer import gain_forward, gain_init
                from .nn import conv2d_forward
                rng = np.random.default_rng(0)
                x = rng.standard_normal((8, c, 32, 32)).astype(np.float32)
                p = gain_init(f, c, args.levels, seed=0)
                p = p.map(lambda a: a.astype(np.float32))
                w = rng.standard_normal(
                    (f, c, args.kernel, args.kernel)).astype(np.float32)
                b = np.zeros(f, dtype=np.float32)
                t0 = time.perf_counter()
                for _ in range(3):
                    gain_forward(x, p)
                row["gain_forward_ms"] = (time.perf_counter() - t0) / 3 * 1e3
                t0 = time.perf_counter()
                for _ in range(3):
                    conv2d_forward(x, w, b, pad=args.kernel // 2)
                row["conv2d_forward_ms"] = (time.perf_counter() - t0) / 3 * 1e3
            rows.append(row)
    cols = list(rows[0].keys())
    with open(out_dir / "bench.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        w.writerows(rows)
    hdr = "  ".join(f"{c:>22s}" for c in cols)
    print(hdr)
    for row in rows:
        print("  ".join(f"{row[c]:>22.2f}" if isinstance(row[c], float)
                        else f"{row[c]:>22d}" for c in cols))
    _write_manifest(out_dir, "bench", {
        "channels": args.channels, "levels": args.levels,
        "kernel": args.kernel, "timing": bool(args.timing),
    }, ["bench.csv"])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------

def _add_common(p):
    p.add_argument("--out-dir", default="out", help="output directory")
    p.add_argument("--config", default=None,
                   help="JSON config file; explicit flags take precedence")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wavegain",
        description="Learnable complex subband gains in the dual-tree "
                    "wavelet domain")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest", help="run PR / adjoint / stage suites")
    _add_common(p)
    p.add_argument("--json", action="store_true")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--filter-set", default="near_sym_a")
    p.add_argument("--corrupt-filters", action="store_true",
                   help="fault-injection hook: verify that a corrupted "
                        "filter table is caught")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("gradcheck", help="finite-difference gradient checks")
    _add_common(p)
    p.add_argument("--layer", default="all",
                   choices=["wavegain", "conv2d", "all"])
    p.add_argument("--precision", default="float64",
                   choices=["float64", "float32"])
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("impulse", help="random scale-2 impulse responses")
    _add_common(p)
    p.add_argument("--num-shapes", type=int, default=8)
    p.add_argument("--size", type=int, default=33)
    p.add_argument("--filter-set", default="near_sym_a")
    p.set_defaults(func=cmd_impulse)

    p = sub.add_parser("corrdof",
                       help="correlation degrees-of-freedom estimate")
    _add_common(p)
    p.add_argument("--num-shapes", type=int, default=512)
    p.add_argument("--size", type=int, default=33)
    p.add_argument("--bins", type=int, default=81)
    p.add_argument("--filter-set", default="near_sym_a")
    p.add_argument("--synthetic-d", type=int, default=0,
                   help="estimator self-test on white vectors of this "
                        "dimension instead of wavelet shapes")
    p.set_defaults(func=cmd_corrdof)

    for name in ("train", "eval"):
        p = sub.add_parser(name)
        _add_common(p)
        p.add_argument("--dataset", default="cifar10",
                       choices=["cifar10", "cifar100", "synthetic"])
        p.add_argument("--data-dir", default=None)
        p.add_argument("--train-size", type=int, default=1000)
        p.add_argument("--batch-size", type=int, default=128)
        p.add_argument("--download-check", action="store_true",
                       help="verify CIFAR file sizes before reading")
        p.add_argument("--subsample-seed", type=int, default=0)
        if name == "train":
            p.add_argument("--model", default="wavelenet")
            p.add_argument("--seeds", type=int, default=5,
                           help="number of seeds (0..n-1)")
            p.add_argument("--epochs", type=int, default=200)
            p.add_argument("--lr", type=float, default=1e-3)
            p.add_argument("--weight-decay", type=float, default=1e-5)
            p.add_argument("--precision", default="float32",
                           choices=["float32", "float64"])
            p.add_argument("--deterministic", action="store_true",
                           default=True)
            p.add_argument("--verbose", action="store_true")
            p.set_defaults(func=cmd_train)
        else:
            p.add_argument("--checkpoint", required=True)
            p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="analytic MAC table and timings")
    _add_common(p)
    p.add_argument("--channels", default="4,16,64")
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--kernel", type=int, default=5)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_bench)

    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _apply_config_defaults(args, ap, argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (DataError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    raise SystemExit(main())
