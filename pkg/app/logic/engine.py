"""Record generation.

Each record draws from its own substream in plan order, so a record depends only on
(plan, fixtures, master seed, index) and index ranges can be generated independently.
"""
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from typing import Deque, Dict, Iterator, List

from app.errors import FixtureMissing, InvalidCount
from app.logic.catalog import AttributeGenerator, GeneratorKind, NamePart
from app.logic.fixture_set import FixtureSet
from app.logic.plan import GenerationPlan
from app.logic.rng import RandomStream, draw_categorical
from app.logic.script import evaluate_script
from app.logic.weights import age_bucket
from app.utils.log import get_logger

logger = get_logger(__name__)

Record = Dict[str, str]
Fields = Dict[str, str]

CHUNK_SIZE = 1024


def _missing(gen: AttributeGenerator, what: str) -> FixtureMissing:
    return FixtureMissing(f"{gen.node_id}: {what} not loaded", source=None)


def _draw(gen: AttributeGenerator, fields: Fields, stream: RandomStream, fixtures: FixtureSet) -> str:
    kind = gen.kind

    if kind is GeneratorKind.INDEPENDENT:
        dist = fixtures.distribution_for(gen)
        if dist is None:
            raise _missing(gen, f"{gen.fixture}.csv")
        value = draw_categorical(dist, stream)
        if gen.clamp:
            lo, hi = gen.clamp
            value = str(min(max(int(value), lo), hi))
        return value

    if kind in (GeneratorKind.AGE_KEYED, GeneratorKind.AGE_GENDER_KEYED):
        grouped = fixtures.grouped_for(gen)
        if grouped is None:
            raise _missing(gen, f"{gen.fixture}Qty tables")
        bucket = age_bucket(int(fields[gen.keys[0]]))
        gender = fields[gen.keys[1]] if kind is GeneratorKind.AGE_GENDER_KEYED else None
        dist = grouped.select(bucket, gender)
        if dist is None:
            raise _missing(gen, f"group {bucket.label} gender={gender}")
        return draw_categorical(dist, stream)

    if kind is GeneratorKind.DERIVED:
        source = fields[gen.keys[0]]
        value = fixtures.country(source)
        if value is None:
            raise _missing(gen, f"{gen.relabel} entry for {source!r}")
        return value

    if kind is GeneratorKind.NAME_PART:
        nationality = fields[gen.keys[0]]
        if gen.part is NamePart.GIVEN:
            dist = fixtures.given_names_for(nationality, fields[gen.keys[1]])
        else:
            dist = fixtures.family_names_for(nationality)
        if dist is None:
            raise _missing(gen, f"{gen.part.value} names for {nationality}")
        return draw_categorical(dist, stream)

    # composed: scripts over sibling fields, whatever variable prefix they use
    bindings = {ref.variable: fields for ref in gen.script.field_refs}
    return evaluate_script(gen.script, bindings)


def generate_fields(plan: GenerationPlan, index: int, master_seed: int, fixtures: FixtureSet) -> Dict[str, Fields]:
    """variable -> generated fields, for one record."""
    stream = RandomStream.for_record(master_seed, index)
    entity: Dict[str, Fields] = {}
    for gen in plan.generators:
        fields = entity.setdefault(gen.variable, {})
        fields[gen.name] = _draw(gen, fields, stream, fixtures)
    return entity


def generate_record(plan: GenerationPlan, index: int, master_seed: int, fixtures: FixtureSet) -> Record:
    entity = generate_fields(plan, index, master_seed, fixtures)
    return {out.name: evaluate_script(out.script, entity) for out in plan.outputs}


def _generate_range(plan: GenerationPlan, indices: range, master_seed: int, fixtures: FixtureSet) -> List[Record]:
    return [generate_record(plan, i, master_seed, fixtures) for i in indices]


def generate_dataset(
    plan: GenerationPlan,
    count: int,
    master_seed: int,
    fixtures: FixtureSet,
    threads: int = 1,
    chunk_size: int = CHUNK_SIZE,
) -> Iterator[Record]:
    """Records 0..count-1 in index order; identical for any `threads`."""
    if count < 1:
        raise InvalidCount(f"count must be >= 1, got {count}")

    if threads <= 1:
        for i in range(count):
            yield generate_record(plan, i, master_seed, fixtures)
        return

    chunks = (range(s, min(s + chunk_size, count)) for s in range(0, count, chunk_size))
    with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="generate") as pool:
        window: Deque = deque()
        for r in chunks:
            window.append(pool.submit(_generate_range, plan, r, master_seed, fixtures))
            if len(window) >= threads * 2:
                yield from window.popleft().result()
        while window:
            yield from window.popleft().result()
    logger.debug("generated count=%d threads=%d", count, threads)
