"""JSON Lines loader and writer for instances, lexicons and stream manifests.

One compositional instance per line:
```json
{"premise": ["kalo", "vexit", "to", "mura", "dopel"], "hypothesis": ["kalo", "mura", "tenva"],
 "ctype": "+e", "gold_ci": "e",
 "ver": {"premise": [...], "hypothesis": [...], "gold": "e", "key": "vexit"},
 "nli": {"premise": [...], "hypothesis": [...], "gold": "e", "key": ["dopel", "tenva"]}}
```

A stream directory holds one JSONL file per stage and a ``manifest.json``
listing the stages in order, with their epochs and block layout.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

from .instances import Block, CompInstance, PrimitivePair, Split, Stage, Stream
from .models import CompType, FunctionType, Label

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def pair_to_dict(pair: PrimitivePair) -> Dict[str, Any]:
    return {
        "premise": list(pair.premise),
        "hypothesis": list(pair.hypothesis),
        "gold": pair.gold.symbol,
        "key": list(pair.key) if isinstance(pair.key, tuple) else pair.key,
    }


def pair_from_dict(data: Dict[str, Any], kind: str) -> PrimitivePair:
    key = data["key"]
    return PrimitivePair(
        kind=kind,  # type: ignore[arg-type]
        premise=tuple(data["premise"]),
        hypothesis=tuple(data["hypothesis"]),
        gold=Label.from_symbol(data["gold"]),
        key=(key[0], key[1]) if isinstance(key, list) else key,
    )


def instance_to_dict(inst: CompInstance) -> Dict[str, Any]:
    return {
        "premise": list(inst.premise),
        "hypothesis": list(inst.hypothesis),
        "ctype": inst.ctype.code,
        "gold_ci": inst.gold_ci.symbol,
        "ver": pair_to_dict(inst.ver),
        "nli": pair_to_dict(inst.nli),
    }


def instance_from_dict(data: Dict[str, Any]) -> CompInstance:
    """Parse one instance record.

    Raises:
        ValueError: If the record is malformed or its labels contradict the composition table.
    """
    try:
        inst = CompInstance(
            premise=tuple(data["premise"]),
            hypothesis=tuple(data["hypothesis"]),
            ver=pair_from_dict(data["ver"], "veridical"),
            nli=pair_from_dict(data["nli"], "nli"),
            ctype=CompType.from_code(data["ctype"]),
            gold_ci=Label.from_symbol(data["gold_ci"]),
        )
    except KeyError as e:
        raise ValueError(f"Instance record is missing field {e}") from None
    if not inst.is_consistent():
        raise ValueError(f"Instance labels contradict the composition table: {data['ctype']}")
    return inst


def save_instances(path: PathLike, instances: List[CompInstance]) -> Path:
    """Write instances as JSON Lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for inst in instances:
            f.write(json.dumps(instance_to_dict(inst)) + "\n")
    logger.debug(f"Wrote {len(instances)} instances to {path}")
    return path


def load_instances(path: PathLike) -> List[CompInstance]:
    """Read instances from a JSON Lines file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If a line is not a valid instance record.
    """
    path = Path(path)
    instances = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                instances.append(instance_from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError) as e:
                raise ValueError(f"{path}:{lineno}: {e}") from None
    return instances


def save_split(directory: PathLike, split: Split) -> Path:
    """Write a split as train/test JSONL plus aligned probe files."""
    directory = Path(directory)
    save_instances(directory / "train.jsonl", split.train)
    save_instances(directory / "test.jsonl", split.test)
    for name, probes in (("unseen_prim_v", split.unseen_prim_v), ("unseen_prim_n", split.unseen_prim_n)):
        with open(directory / f"{name}.jsonl", "w") as f:
            for probe in probes:
                f.write(json.dumps(pair_to_dict(probe)) + "\n")
    with open(directory / "split.json", "w") as f:
        json.dump({"fold": split.fold.code, "train": len(split.train), "test": len(split.test)}, f)
    return directory


def load_split(directory: PathLike) -> Split:
    directory = Path(directory)
    with open(directory / "split.json", "r") as f:
        meta = json.load(f)

    def probes(name: str, kind: str) -> List[PrimitivePair]:
        with open(directory / f"{name}.jsonl", "r") as f:
            return [pair_from_dict(json.loads(line), kind) for line in f if line.strip()]

    return Split(
        fold=CompType.from_code(meta["fold"]),
        train=load_instances(directory / "train.jsonl"),
        test=load_instances(directory / "test.jsonl"),
        unseen_prim_v=probes("unseen_prim_v", "veridical"),
        unseen_prim_n=probes("unseen_prim_n", "nli"),
    )


def save_stream(directory: PathLike, stream: Stream) -> Path:
    """Write each stage to ``<name>.jsonl`` and the stage list to ``manifest.json``.

    Returns:
        Path of the manifest.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    stages = []
    for stage in stream.stages:
        file = f"{stage.name}.jsonl"
        save_instances(directory / file, stage.instances)
        blocks, start = [], 0
        for block in stage.blocks:
            stop = start + len(block.instances)
            blocks.append(
                {
                    "name": block.name,
                    "function": block.function.value if block.function else None,
                    "heads": sorted(block.heads),
                    "start": start,
                    "stop": stop,
                }
            )
            start = stop
        stages.append({"name": stage.name, "file": file, "epochs": stage.epochs, "blocks": blocks})

    manifest = {"regime": stream.regime, "order": stream.order, "stages": stages}
    path = directory / "manifest.json"
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2)
    logger.info(f"Wrote stream manifest {path} ({len(stages)} stage(s))")
    return path


def load_stream(manifest_path: PathLike) -> Stream:
    """Read a stream back from its manifest.

    Stages without a ``blocks`` list load as one block supervising every head.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path, "r") as f:
        manifest = json.load(f)

    stages = []
    for entry in manifest["stages"]:
        instances = load_instances(manifest_path.parent / entry["file"])
        blocks = [
            Block(
                instances[b["start"] : b["stop"]],
                heads=frozenset(b["heads"]),
                function=FunctionType(b["function"]) if b.get("function") else None,
                name=b.get("name", "all"),
            )
            for b in entry.get("blocks") or []
        ] or [Block(instances)]
        stages.append(Stage(name=entry["name"], blocks=blocks, epochs=int(entry.get("epochs", 3))))

    return Stream(stages=stages, regime=manifest.get("regime", "c2gen"), order=manifest.get("order"))
