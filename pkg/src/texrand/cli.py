"""``texrand`` command-line entry point.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 validation error,
5 numerical failure. With ``--json`` every run, failed or not, prints exactly
one JSON object on stdout; human-readable text is suppressed.

Seeds: every command takes one root ``--seed``. ``tcps select`` draws its
permutation from it, ``ltr mask`` draws the mask from it, ``augment`` gives
the i-th input file (sorted by name) the stream ``derive_seed(seed, i)``,
``train`` uses it as the training seed and generates its source data with
``derive_seed(seed, 1000)``, and ``dataset``/``eval`` pass it straight to the
toy generator.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ImageIOError, InvalidParameterError, TexrandError
from .gtr import CodecWeights, gtr_stylize
from .imaging import Image, read_image, write_image
from .ltr import LtrConfig, generate_mask, mix
from .rng import RngStream, derive_seed
from .tcps import SelectionConfig, list_images, load_pool, read_manifest, sample_painting, select_paintings
from .tcps import texture_complexity, write_manifest

TRAIN_DATA_INDEX = 1000


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class Output:
    def __init__(self, json_mode: bool, quiet: bool):
        self.json_mode = json_mode
        self.quiet = quiet

    def say(self, text: str) -> None:
        if not (self.json_mode or self.quiet):
            print(text)


def _parse_pair(text: str, sep: str, cast, what: str):
    try:
        a, b = text.split(sep)
        return cast(a), cast(b)
    except ValueError:
        raise InvalidParameterError(f"{what}: expected A{sep}B, got {text!r}") from None


def _load_codec(backend: str, weights: str | None) -> CodecWeights:
    if backend == "identity":
        return CodecWeights.identity()
    if not weights:
        raise InvalidParameterError("the conv backend needs --weights")
    return CodecWeights.load(weights)


def _rgb(img: Image) -> Image:
    img = img.to_unit()
    if img.channels == 1:
        return Image(np.repeat(img.data, 3, axis=2), "unit")
    return img


def _mask_image(bits: np.ndarray) -> Image:
    return Image(bits[:, :, None].astype(np.float64) * 255.0, "byte")


# tcps

def cmd_tcps_score(args, out: Output) -> dict:
    tc = texture_complexity(read_image(args.image), args.epsilon)
    out.say(f"{tc:.4f}")
    return {"path": args.image, "epsilon": args.epsilon, "texture_complexity": tc}


def cmd_tcps_select(args, out: Output) -> dict:
    lo, hi = _parse_pair(args.band, ":", float, "--band")
    cfg = SelectionConfig(args.epsilon, lo, hi, args.k, args.seed)
    chosen = select_paintings(args.dir, cfg)
    write_manifest(args.out, chosen)
    for r in chosen:
        out.say(f"{r.texture_complexity:.4f}  {r.path}")
    out.say(f"wrote {len(chosen)} paintings to {args.out}")
    return {"manifest": args.out, "k": len(chosen),
            "paintings": [{"path": r.path, "texture_complexity": r.texture_complexity} for r in chosen]}


# gtr

def cmd_gtr(args, out: Output) -> dict:
    codec = _load_codec(args.backend, args.weights)
    result = gtr_stylize(_rgb(read_image(args.content)), _rgb(read_image(args.style)), codec)
    write_image(args.out, result)
    out.say(f"wrote {args.out}")
    return {"out": args.out, "backend": codec.backend}


# ltr

def _ltr_config(args) -> LtrConfig:
    if args.lam is not None:
        lo = hi = args.lam
    else:
        lo, hi = _parse_pair(args.lambda_range, ":", float, "--lambda-range")
    return LtrConfig(lo, hi, args.p, kernel_radius=args.kernel_radius)


def cmd_ltr_mask(args, out: Output) -> dict:
    h, w = _parse_pair(args.size.lower(), "x", int, "--size")
    mask = generate_mask(h, w, _ltr_config(args), RngStream(args.seed))
    write_image(args.out, _mask_image(mask.bits))
    out.say(f"lambda {mask.lambda_used:.4f}  white fraction {mask.white_fraction:.4f}  -> {args.out}")
    return {"out": args.out, "seed": args.seed, "lambda": mask.lambda_used,
            "p": mask.p, "white_fraction": mask.white_fraction}


def cmd_ltr_apply(args, out: Output) -> dict:
    content = _rgb(read_image(args.content))
    stylized = _rgb(read_image(args.stylized))
    m = read_image(args.mask)
    bits = (m.data[:, :, 0] >= 128).astype(np.uint8)
    write_image(args.out, mix(content, stylized, bits))
    out.say(f"wrote {args.out}")
    return {"out": args.out, "white_fraction": float(bits.mean())}


# augment

def augment_batch(in_dir, pool_path, ltr_cfg: LtrConfig, out_dir, seed: int,
                  codec: CodecWeights | None = None) -> dict:
    """Write ``<stem>.gtr.png``, ``<stem>.ltr.png`` and ``<stem>.mask.png`` per input.

    Returns the manifest (also written to ``out_dir/manifest.json``). Inputs
    that fail are listed under ``"failed"`` and do not stop the batch.
    """
    codec = codec or CodecWeights.identity()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = read_manifest(pool_path)
    pool = load_pool(pool_path)
    if not pool:
        raise InvalidParameterError(f"{pool_path}: painting pool is empty")
    items, failed = [], []
    for i, path in enumerate(list_images(in_dir)):
        file_seed = derive_seed(seed, i)
        rng = RngStream(file_seed)
        try:
            x = _rgb(read_image(path))
            j = rng.integers(len(pool))
            x_gtr = gtr_stylize(x, _rgb(pool[j]), codec)
            mask = generate_mask(x.height, x.width, ltr_cfg, rng)
            x_ltr = mix(x, x_gtr, mask)
            stem = out_dir / path.stem
            write_image(f"{stem}.gtr.png", x_gtr)
            write_image(f"{stem}.ltr.png", x_ltr)
            write_image(f"{stem}.mask.png", _mask_image(mask.bits))
        except TexrandError as exc:
            failed.append({"input": str(path), "error": str(exc), "exit_code": exc.exit_code})
            continue
        items.append({
            "input": str(path), "seed": file_seed, "painting": entries[j]["path"],
            "lambda": mask.lambda_used, "p": mask.p, "white_fraction": mask.white_fraction,
            "gtr": f"{stem}.gtr.png", "ltr": f"{stem}.ltr.png", "mask": f"{stem}.mask.png",
        })
    manifest = {"seed": seed, "backend": codec.backend, "lambda_min": ltr_cfg.lambda_min,
                "lambda_max": ltr_cfg.lambda_max, "items": items, "failed": failed}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def cmd_augment(args, out: Output) -> dict:
    codec = _load_codec(args.backend, args.weights)
    manifest = augment_batch(args.in_dir, args.pool, _ltr_config(args), args.out, args.seed, codec)
    for item in manifest["items"]:
        out.say(f"{item['input']}: lambda {item['lambda']:.3f}, painting {item['painting']}")
    for f in manifest["failed"]:
        print(f"failed: {f['input']}: {f['error']}", file=sys.stderr)
    out.say(f"{len(manifest['items'])} augmented, {len(manifest['failed'])} failed")
    result = {"manifest": str(Path(args.out) / "manifest.json"),
              "augmented": len(manifest["items"]), "failed": manifest["failed"]}
    if manifest["failed"]:
        result["exit_code"] = max(f["exit_code"] for f in manifest["failed"])
    return result


# toy data, training, evaluation

def cmd_dataset(args, out: Output) -> dict:
    from .trainer.toydata import gen_toy_dataset

    samples = gen_toy_dataset(args.domain, args.n, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(samples):
        write_image(out_dir / f"{i:05d}.png", s.image)
        write_image(out_dir / f"{i:05d}.label.png", Image(s.label[:, :, None].astype(np.float64), "byte"))
    out.say(f"wrote {len(samples)} {args.domain} samples to {out_dir}")
    return {"out": str(out_dir), "domain": args.domain, "n": len(samples), "seed": args.seed}


def cmd_train(args, out: Output) -> dict:
    from .trainer.toydata import gen_toy_dataset
    from .trainer.train import format_log, load_config, train

    overrides = {k: getattr(args, k) for k in
                 ("iterations", "lr0", "beta", "batch_size", "gtr", "ltr", "cgl", "mirror", "blur", "precision")}
    if args.seed_given:
        overrides["seed"] = args.seed
    cfg = load_config(args.config, **overrides)
    pool = load_pool(args.pool) if args.pool else []
    data = gen_toy_dataset("source", args.n, derive_seed(cfg.seed, TRAIN_DATA_INDEX))

    def progress(row):
        t, lr, ls, lc = row
        out.say(f"iter {t:>7d}  lr {lr:.3e}  l_seg {ls:.5f}  l_con {lc:.5f}")

    codec = _load_codec(args.backend, args.weights)
    model, rows = train(cfg, pool, data, codec, progress)
    model.save(args.out)
    if args.log:
        Path(args.log).write_text(format_log(rows))
    out.say(f"wrote {args.out}")
    return {"model": args.out, "log": args.log, "seed": cfg.seed, "iterations": cfg.iterations,
            "final_l_seg": rows[-1][2], "final_l_con": rows[-1][3]}


def cmd_eval(args, out: Output) -> dict:
    from .trainer.model import SegModel
    from .trainer.toydata import CLASS_NAMES, gen_toy_dataset
    from .trainer.train import evaluate

    model = SegModel.load(args.model)
    per_class, mean = evaluate(model, gen_toy_dataset(args.dataset, args.n, args.seed))
    names = CLASS_NAMES if len(CLASS_NAMES) == len(per_class) else [f"class{c}" for c in range(len(per_class))]
    for name, iou in zip(names, per_class):
        out.say(f"{name:<12s} {'n/a' if np.isnan(iou) else f'{iou:.4f}'}")
    out.say(f"{'mIoU':<12s} {mean:.4f}")
    return {"dataset": args.dataset, "n": args.n, "seed": args.seed,
            "per_class_iou": {n: (None if np.isnan(v) else float(v)) for n, v in zip(names, per_class)},
            "miou": mean}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="root seed (default 0)")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="print one JSON object on stdout")

    parser = _Parser(prog="texrand", parents=[common], description="Texture randomization toolkit.")
    parser.add_argument("--version", action="version", version=f"texrand {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    tcps = sub.add_parser("tcps", help="painting selection by texture complexity")
    tsub = tcps.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = tsub.add_parser("score", parents=[common], help="print texture complexity of one image")
    p.add_argument("image")
    p.add_argument("--epsilon", type=float, default=20.0)
    p.set_defaults(func=cmd_tcps_score)
    p = tsub.add_parser("select", parents=[common], help="select a painting pool into a manifest")
    p.add_argument("--dir", required=True)
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--band", default="0.55:0.65")
    p.add_argument("--epsilon", type=float, default=20.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tcps_select)

    p = sub.add_parser("gtr", parents=[common], help="global texture randomization of one image")
    p.add_argument("--content", required=True)
    p.add_argument("--style", required=True)
    p.add_argument("--backend", choices=("identity", "conv"), default="identity")
    p.add_argument("--weights")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gtr)

    def lambda_flags(q):
        g = q.add_mutually_exclusive_group()
        g.add_argument("--lambda", dest="lam", type=float, help="fixed lambda")
        g.add_argument("--lambda-range", default="4:16", help="lambda drawn uniformly from MIN:MAX")
        q.add_argument("--p", type=float, default=0.5, help="white-pixel proportion")
        q.add_argument("--kernel-radius", type=int, help="override the ceil(3*gamma) kernel radius")

    ltr = sub.add_parser("ltr", help="local texture randomization")
    lsub = ltr.add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = lsub.add_parser("mask", parents=[common], help="write a random-boundary mask PNG")
    p.add_argument("--size", default="640x640", help="HxW")
    lambda_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ltr_mask)
    p = lsub.add_parser("apply", parents=[common], help="mix content and stylized images through a mask")
    p.add_argument("--content", required=True)
    p.add_argument("--stylized", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ltr_apply)

    p = sub.add_parser("augment", parents=[common], help="GTR + LTR for every image in a directory")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--pool", required=True, help="manifest from 'tcps select'")
    p.add_argument("--out", required=True)
    p.add_argument("--backend", choices=("identity", "conv"), default="identity")
    p.add_argument("--weights")
    lambda_flags(p)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("dataset", parents=[common], help="write toy benchmark samples as PNGs")
    p.add_argument("--domain", choices=("source", "target"), required=True)
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("train", parents=[common], help="train the toy segmentation model")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--pool", help="painting manifest (needed for gtr/ltr)")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--log", help="CSV log path")
    p.add_argument("--n", type=int, default=500, help="number of source training samples")
    p.add_argument("--iterations", type=int)
    p.add_argument("--lr0", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--precision", choices=("float64", "float32"))
    for flag in ("gtr", "ltr", "cgl", "mirror", "blur"):
        p.add_argument(f"--{flag}", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--backend", choices=("identity", "conv"), default="identity")
    p.add_argument("--weights")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", parents=[common], help="per-class IoU and mIoU on toy data")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", choices=("source", "target"), default="target")
    p.add_argument("--n", type=int, default=200)
    p.set_defaults(func=cmd_eval)
    return parser


def _emit_json(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True, default=float))


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    json_mode = "--json" in argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        if json_mode:
            _emit_json({"ok": False, "exit_code": 2, "error": str(exc)})
        return 2
    args.seed_given = hasattr(args, "seed")
    args.seed = getattr(args, "seed", 0)
    out = Output(getattr(args, "json", False), getattr(args, "quiet", False))
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        result = args.func(args, out)
        code = result.pop("exit_code", 0)
    except TexrandError as exc:
        result, code = {"error": str(exc)}, exc.exit_code
    except OSError as exc:
        result, code = {"error": str(ImageIOError(str(exc)))}, 3
    except ValueError as exc:
        result, code = {"error": str(InvalidParameterError(str(exc)))}, 4
    if code and "error" in result:
        print(f"texrand: {result['error']}", file=sys.stderr)
    if out.json_mode:
        _emit_json({"ok": code == 0, "exit_code": code, "command": args.command, **result})
    return code


if __name__ == "__main__":
    sys.exit(main())
