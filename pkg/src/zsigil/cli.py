"""Command-line interface: ``zsigil keygen|encrypt|decrypt|attack``.

Exit codes: 0 ok, 2 bad parameters or unparsable input, 3 key generation
failure, 4 capacity exceeded, 5 integrity failure on decryption.
"""

from __future__ import annotations

import argparse
import logging
import secrets
import sys
from pathlib import Path

import numpy as np

from . import attack_lab, formats, scheme
from .analytic import chain_values
from .errors import CapacityError, FormatError, GenerationError, IntegrityError
from .manifold import TorusModel

log = logging.getLogger("zsigil")

EXIT_OK, EXIT_USAGE, EXIT_GENERATION, EXIT_CAPACITY, EXIT_INTEGRITY = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _seed(value: str | None) -> bytes:
    if value is None:
        return secrets.token_bytes(32)
    try:
        raw = bytes.fromhex(value)
    except ValueError as exc:
        raise UsageError(f"--seed must be hex: {exc}") from exc
    if len(raw) != 32:
        raise UsageError("--seed must be 64 hex characters")
    return raw


def _rng(seed: bytes) -> np.random.Generator:
    return np.random.default_rng(np.frombuffer(seed, dtype="<u4"))


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_keygen(args) -> int:
    try:
        model = TorusModel(args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.max_blocks < 1:
        raise UsageError("--max-blocks must be >= 1")
    key = scheme.keygen(model, args.max_blocks, seed=_seed(args.seed))
    Path(f"{args.out}.pub").write_text(formats.dump_public_key(key.public))
    Path(f"{args.out}.key").write_text(formats.dump_private_key(key))
    log.info("wrote %s.pub and %s.key (r=%d, D_max=%d)", args.out, args.out, model.r, args.max_blocks)
    return EXIT_OK


def _read_utf8(path: str) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as exc:
        raise UsageError(f"{path} is not valid UTF-8: {exc}") from exc


def cmd_encrypt(args) -> int:
    pub = formats.load_public_key(Path(args.pub).read_text())
    text = _read_utf8(args.input)
    ct = scheme.encrypt(pub, text, message_seed=_seed(args.seed))
    Path(args.out).write_bytes(formats.dump_ciphertext(ct))
    return EXIT_OK


def cmd_decrypt(args) -> int:
    key = formats.load_private_key(Path(args.key).read_text())
    ct = formats.load_ciphertext(Path(args.input).read_bytes())
    text = scheme.decrypt(key, ct)
    Path(args.out).write_bytes(text.encode("utf-8"))
    return EXIT_OK


def _random_bmp_text(rng, length: int) -> str:
    units = rng.integers(0x20, 0xD800, size=length)
    return "".join(map(chr, units.tolist()))


def _summary(fmt: str, *args):
    print(fmt % args, file=sys.stderr)


def attack_grover(args) -> str:
    model = attack_lab.SearchSpaceModel(args.bits, args.alpha)
    est = attack_lab.grover_queries(model, args.degree)
    below_hi, below_lo = attack_lab.cosmological_margin(est.lower_bound_log10)
    row = {
        "n": args.bits,
        "alpha": args.alpha,
        "log2_S": est.log2_space,
        "lower_bound_log2": est.lower_bound_log2,
        "log10": round(est.lower_bound_log10, 6),
        "log10_queries": round(est.log10_queries, 6),
        "gate_degree": est.gate_degree,
        "log10_gate_cost": round(est.log10_gate_cost, 6),
        "orders_above_1e122": round(below_hi, 6),
        "orders_above_1e120": round(below_lo, 6),
    }
    _summary("Grover lower bound 2^%g ~ 10^%.3f queries", est.lower_bound_log2, est.lower_bound_log10)
    return attack_lab.to_csv([row])


def attack_exhaustive(args) -> str:
    if args.levels < 2:
        raise UsageError("--levels must be >= 2 for planted experiments")
    try:
        space = attack_lab.DiscretizedKeySpace(args.levels, args.dim)
        TorusModel(args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if space.size > attack_lab.DESK_SCALE_LIMIT:
        raise UsageError(f"S = {args.levels}^{args.dim} exceeds desk scale 2^24")
    rep = attack_lab.run_exhaustive_experiment(space, args.trials, _rng(_seed(args.seed)))
    _summary("S=%d: mean %.2f queries over %d trials (uniform expectation %.1f)",
             rep.S, rep.mean_queries, rep.trials, (rep.S + 1) / 2)
    return attack_lab.to_csv([rep], attack_lab.EXHAUSTIVE_COLUMNS)


def attack_ratio(args) -> str:
    rng = _rng(_seed(args.seed))
    key = scheme.keygen(TorusModel(args.dim), args.blocks, seed=rng.bytes(32))
    public_hits = withheld_hits = 0
    for _ in range(args.trials):
        text = _random_bmp_text(rng, args.blocks)
        ct = scheme.encrypt(key.public, text, message_seed=rng.bytes(32))
        honest = attack_lab.ratio_attack(key.public, ct, chain_values(ct.message_seed, ct.D), text)
        guessed = attack_lab.ratio_attack(key.public, ct, chain_values(rng.bytes(32), ct.D), text)
        public_hits += honest.full_recovery
        withheld_hits += guessed.full_recovery
    row = {
        "trials": args.trials,
        "blocks": args.blocks,
        "public_chain_recovery": public_hits / args.trials,
        "withheld_chain_recovery": withheld_hits / args.trials,
    }
    _summary("ratio attack: %.0f%% recovery with the public chain, %.0f%% with a guessed chain",
             100 * row["public_chain_recovery"], 100 * row["withheld_chain_recovery"])
    return attack_lab.to_csv([row])


def attack_depth(args) -> str:
    rng = _rng(_seed(args.seed))
    key = scheme.keygen(TorusModel(args.dim), args.blocks, seed=rng.bytes(32))
    ct = scheme.encrypt(key.public, _random_bmp_text(rng, args.blocks), message_seed=rng.bytes(32))
    fails = attack_lab.shuffled_chain_failures(key, ct, rng, args.trials) if ct.D > 1 else [0]
    row = {
        "D": ct.D,
        "depth": attack_lab.serial_depth(ct),
        "trials": args.trials,
        "min_shuffled_failures": min(fails),
        "max_shuffled_failures": max(fails),
    }
    _summary("serial depth %d; shuffled-chain decryption failed %d..%d of %d blocks",
             row["depth"], row["min_shuffled_failures"], row["max_shuffled_failures"], ct.D)
    return attack_lab.to_csv([row])


ATTACKS = {"grover": attack_grover, "exhaustive": attack_exhaustive, "ratio": attack_ratio, "depth": attack_depth}


DEFAULT_TRIALS = {"grover": 1, "exhaustive": 1000, "ratio": 100, "depth": 10}


def cmd_attack(args) -> int:
    if args.trials is None:
        args.trials = DEFAULT_TRIALS[args.mode]
    for name in ("trials", "blocks"):
        if getattr(args, name) < 1:
            raise UsageError(f"--{name} must be >= 1")
    _emit(ATTACKS[args.mode](args), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zsigil", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keygen", help="generate a key pair")
    p.add_argument("--dim", type=int, default=6, help="real dimension r (even)")
    p.add_argument("--max-blocks", type=int, default=scheme.DEFAULT_MAX_BLOCKS)
    p.add_argument("--seed", help="64 hex chars; system entropy if omitted")
    p.add_argument("--out", required=True, help="basename for .pub and .key")
    p.set_defaults(func=cmd_keygen)

    p = sub.add_parser("encrypt", help="encrypt a UTF-8 text file")
    p.add_argument("--pub", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed")
    p.set_defaults(func=cmd_encrypt)

    p = sub.add_parser("decrypt", help="decrypt a ciphertext file")
    p.add_argument("--key", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decrypt)

    p = sub.add_parser("attack", help="run an adversary-cost experiment, CSV output")
    p.add_argument("--mode", choices=sorted(ATTACKS), required=True)
    p.add_argument("--bits", type=int, default=1024)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--degree", type=int, default=1, help="gate cost per oracle call is n^degree")
    p.add_argument("--levels", type=int, default=2)
    p.add_argument("--dim", type=int, default=8)
    p.add_argument("--trials", type=int, help="default: 1000 exhaustive, 100 ratio, 10 depth")
    p.add_argument("--blocks", type=int, default=64)
    p.add_argument("--seed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_attack)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, FormatError, OSError) as exc:
        print(f"zsigil: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as exc:
        print(f"zsigil: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except IntegrityError as exc:
        print(f"zsigil: integrity failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRITY
    except GenerationError as exc:
        print(f"zsigil: generation failure: {exc}", file=sys.stderr)
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
