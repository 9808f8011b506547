"""Command-line front-end: encode files to shards, recover, repair, report curves."""

from __future__ import annotations

import functools
import sys
from fractions import Fraction
from pathlib import Path

import click

from .cluster import (
    Cluster,
    bandwidth_table,
    capacity_curve,
    load_cluster,
    shard_path,
    write_all_shards,
    write_shard,
)
from .code import CodeConfig, encode as encode_stripes
from .field import next_prime_at_least


def _parse_ids(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}")


def _rational(value) -> str:
    return str(Fraction(value))


def _friendly_errors(fn):
    """Present domain errors as one-line messages instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, ZeroDivisionError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


@click.group()
def main():
    """Erasure-coded storage with bandwidth-efficient exact node repair."""


@main.command(name="encode")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--n", "n", required=True, type=int, help="Total storage nodes.")
@click.option("--d", "d", required=True, type=int, help="Helpers per repair (= recovery threshold).")
@click.option("--m", "m", required=True, type=int, help="Trade-off mode, 1 (min bandwidth) .. d (min storage).")
@click.option("--prime", "prime", type=int, default=None, help="Field modulus; defaults to the smallest usable prime >= 257.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@_friendly_errors
def encode_cmd(input_path: Path, n: int, d: int, m: int, prime: int | None, out_dir: Path):
    """Encode a file into n shard files, one per node."""
    if prime is None:
        prime = next_prime_at_least(max(257, n + 1))
    config = CodeConfig(n=n, d=d, m=m, p=prime)
    data = input_path.read_bytes()
    cluster = Cluster.from_file(data, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = write_all_shards(out_dir, cluster)
    click.echo(
        f"encoded {len(data)} bytes into {len(paths)} shards "
        f"({cluster.stripe_count} stripes, alpha={config.alpha}, beta={config.beta}, "
        f"F={config.file_symbols}, p={config.p})"
    )


@main.command(name="recover")
@click.option("--shards", "shard_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--nodes", "nodes", required=True, help="Comma-separated ids of the d nodes to read.")
@click.option("--output", "output_path", required=True, type=click.Path(dir_okay=False, path_type=Path))
@_friendly_errors
def recover_cmd(shard_dir: Path, nodes: str, output_path: Path):
    """Rebuild the original file from any d shards."""
    ids = _parse_ids(nodes)
    cluster = load_cluster(shard_dir)
    data = cluster.recover_file(ids)
    output_path.write_bytes(data)
    click.echo(f"recovered {len(data)} bytes from nodes {list(ids)}")


@main.command(name="repair")
@click.option("--shards", "shard_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--failed", "failed", required=True, type=int)
@click.option("--helpers", "helpers", default=None, help="Comma-separated helper ids (default: first d alive).")
@_friendly_errors
def repair_cmd(shard_dir: Path, failed: int, helpers: str | None):
    """Regenerate one node's shard from d helpers."""
    cluster = load_cluster(shard_dir)
    cluster.fail_nodes([failed])
    event = cluster.repair("single", [failed], _parse_ids(helpers) if helpers else None)
    write_shard(
        shard_path(shard_dir, failed),
        cluster.config,
        failed,
        cluster.node_content(failed),
        cluster.original_len or 0,
    )
    per_helper = ", ".join(f"{h}:{v}" for h, v in sorted(event.symbols_by_helper.items()))
    click.echo(
        f"repaired node {failed} with helpers {list(event.helpers)}; "
        f"symbols per helper ({event.stripes} stripes): {per_helper}"
    )


@main.command(name="multirepair")
@click.option("--shards", "shard_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--failed", "failed", required=True, help="Comma-separated failed node ids.")
@click.option("--mode", "mode", type=click.Choice(["naive", "joint", "centralized"]), default="joint", show_default=True)
@click.option("--helpers", "helpers", default=None, help="Comma-separated helper ids (default: first d alive).")
@_friendly_errors
def multirepair_cmd(shard_dir: Path, failed: str, mode: str, helpers: str | None):
    """Regenerate several nodes at once."""
    failed_ids = _parse_ids(failed)
    cluster = load_cluster(shard_dir)
    cluster.fail_nodes(failed_ids)
    event = cluster.repair(mode, failed_ids, _parse_ids(helpers) if helpers else None)
    for f in failed_ids:
        write_shard(
            shard_path(shard_dir, f),
            cluster.config,
            f,
            cluster.node_content(f),
            cluster.original_len or 0,
        )
    per_helper = ", ".join(f"{h}:{v}" for h, v in sorted(event.symbols_by_helper.items()))
    click.echo(
        f"repaired nodes {list(failed_ids)} in {mode} mode; "
        f"symbols per helper ({event.stripes} stripes): {per_helper}; total {event.total}"
    )


def _mismatch_set(cluster, reference) -> set[int] | None:
    """Nodes whose stored rows disagree with the data recovered from *reference*.

    Returns None when the reference itself is internally inconsistent
    (parity fails on recovery).
    """
    from .code import ParityViolation

    try:
        stripes = cluster.recover_stripes(reference)
    except ParityViolation:
        return None
    alive = cluster.alive()
    bad: set[int] = set()
    for s, stripe in enumerate(stripes):
        expected = encode_stripes(cluster.encoder, stripe)
        for node_id in alive:
            if cluster.node_content(node_id)[s] != expected[node_id - 1]:
                bad.add(node_id)
    return bad


@main.command(name="verify")
@click.option("--shards", "shard_dir", required=True, type=click.Path(exists=True, file_okay=False, path_type=Path))
@_friendly_errors
def verify_cmd(shard_dir: Path):
    """Cross-check every shard against data recovered from d of them.

    A corrupt shard inside the reference subset would shift the blame onto
    the honest ones, so all rotations of the alive list are tried and the
    attribution with the fewest mismatches wins.
    """
    cluster = load_cluster(shard_dir)
    alive = cluster.alive()
    d = cluster.config.d
    best: set[int] | None = None
    for k in range(len(alive)):
        window = [alive[(k + j) % len(alive)] for j in range(d)]
        bad = _mismatch_set(cluster, window)
        if bad is None:
            continue
        if best is None or len(bad) < len(best):
            best = bad
        if not best:
            break
    if best is None:
        click.echo("every reference subset is internally inconsistent")
        sys.exit(1)
    for node_id in alive:
        click.echo(f"node {node_id}: {'MISMATCH' if node_id in best else 'ok'}")
    missing = sorted(set(range(1, cluster.config.n + 1)) - set(alive))
    if missing:
        click.echo(f"missing shards: {missing}")
    if best:
        sys.exit(1)
    click.echo(f"verified {cluster.stripe_count} stripes across {len(alive)} shards")


@main.command(name="bandwidth")
@click.option("--d", "d", required=True, type=int)
@click.option("--m", "m", required=True, type=int)
@click.option("--emax", "e_max", required=True, type=int)
@click.option("--mode", "mode", type=click.Choice(["naive", "joint", "centralized", "all"]), default="all", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv"]), default="csv", show_default=True)
@_friendly_errors
def bandwidth_cmd(d: int, m: int, e_max: int, mode: str, fmt: str):
    """Per-helper repair bandwidth vs. number of failures, exact rationals."""
    click.echo("e,mode,symbols,normalized,decimal")
    for e, kind, symbols, normalized in bandwidth_table(d, m, e_max, mode):
        click.echo(
            f"{e},{kind},{_rational(symbols)},{_rational(normalized)},{float(normalized):.10g}"
        )


@main.command(name="capacity")
@click.option("--d", "d", required=True, type=int)
@click.option("--m", "m", required=True, type=int)
@click.option("--nmax", "n_max", required=True, type=int)
@click.option("--format", "fmt", type=click.Choice(["csv"]), default="csv", show_default=True)
@_friendly_errors
def capacity_cmd(d: int, m: int, n_max: int, fmt: str):
    """Verified storage capacity for every node count from d+1 to nmax."""
    click.echo("n,F")
    for n, capacity in capacity_curve(d, m, range(d + 1, n_max + 1)):
        click.echo(f"{n},{capacity}")


if __name__ == "__main__":
    main()
