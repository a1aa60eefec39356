from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from app.errors import CyclicDependency, MissingDependency, UnknownGenerator
from app.logic.catalog import AttributeGenerator, GeneratorKind, catalog_for
from app.logic.schema import DescriptorModel
from app.utils.log import get_logger

logger = get_logger(__name__)

Catalog = Mapping[str, AttributeGenerator]


@dataclass(frozen=True)
class GenerationPlan:
    entity_type: str
    # field generators bound to their variable, in draw order
    generators: Tuple[AttributeGenerator, ...]
    # one composed generator per descriptor attribute, in declaration order
    outputs: Tuple[AttributeGenerator, ...]
    # implicit prerequisites no attribute references; drawn, never output
    hidden: FrozenSet[str] = frozenset()

    @property
    def attribute_names(self) -> Tuple[str, ...]:
        return tuple(o.name for o in self.outputs)

    def position(self, node_id: str) -> int:
        for i, g in enumerate(self.generators):
            if g.node_id == node_id:
                return i
        raise KeyError(node_id)

    def attribute_order(self) -> Tuple[str, ...]:
        """Descriptor attributes ordered by when their last input becomes available."""
        by_id = {g.node_id: g for g in self.generators}

        def drawn_at(node_id: str) -> int:
            gen = by_id[node_id]
            # derived values exist as soon as their source does
            if gen.kind is GeneratorKind.DERIVED:
                return drawn_at(f"{gen.variable}.{gen.keys[0]}")
            return self.position(node_id)

        def ready_at(out: AttributeGenerator) -> int:
            refs = [f"{r.variable}.{r.field}" for r in out.script.field_refs]
            return max((drawn_at(r) for r in refs), default=-1)

        return tuple(o.name for o in sorted(self.outputs, key=ready_at))

    def fixture_generators(self) -> Tuple[AttributeGenerator, ...]:
        return tuple(g for g in self.generators if g.kind is not GeneratorKind.COMPOSED)


def _find_cycle(pending: Dict[str, Set[str]], rank: Dict[str, int]) -> List[str]:
    start = min(pending, key=rank.__getitem__)
    path: List[str] = []
    seen: Dict[str, int] = {}
    node = start
    while node not in seen:
        seen[node] = len(path)
        path.append(node)
        node = min(pending[node], key=rank.__getitem__)
    return path[seen[node]:] + [node]


def _level_order(deps: Dict[str, Set[str]], rank: Dict[str, int]) -> List[str]:
    """Kahn's algorithm, one level at a time; ties broken by declaration rank."""
    pending = {n: set(d) for n, d in deps.items()}
    ordered: List[str] = []
    while pending:
        ready = sorted((n for n, d in pending.items() if not d), key=rank.__getitem__)
        if not ready:
            raise CyclicDependency(_find_cycle(pending, rank))
        ordered.extend(ready)
        for n in ready:
            pending.pop(n)
        for d in pending.values():
            d.difference_update(ready)
    return ordered


def build_plan(model: DescriptorModel, catalog: Optional[Catalog] = None) -> GenerationPlan:
    """Resolve every field the descriptor's scripts reference and order the draws.

    `catalog` overrides the registry lookup by generator id for every variable.
    """
    catalogs: Dict[str, Catalog] = {}
    for var in model.variables:
        found = catalog if catalog is not None else catalog_for(var.generator_id)
        if found is None:
            raise UnknownGenerator(f"variable {var.name!r}: no generator named {var.generator_id!r}")
        catalogs[var.name] = found

    nodes: Dict[str, AttributeGenerator] = {}
    rank: Dict[str, int] = {}
    for attr in model.attributes:
        for ref in attr.source.field_refs:
            gen = catalogs[ref.variable].get(ref.field)
            if gen is None:
                raise UnknownGenerator(
                    f"attribute {attr.name!r}: {ref} has no generator in {ref.variable!r}"
                )
            bound = replace(gen, variable=ref.variable)
            if bound.node_id not in nodes:
                nodes[bound.node_id] = bound
                rank[bound.node_id] = len(rank)

    deps: Dict[str, Set[str]] = {}
    hidden: Set[str] = set()
    queue = list(nodes)
    while queue:
        node_id = queue.pop(0)
        gen = nodes[node_id]
        needed = {f"{gen.variable}.{d}" for d in gen.depends_on}
        missing = []
        for dep_id in sorted(needed - nodes.keys()):
            dep = catalogs[gen.variable].get(dep_id.split(".", 1)[1])
            if dep is None or not dep.implicit:
                missing.append(dep_id)
                continue
            nodes[dep_id] = replace(dep, variable=gen.variable)
            rank[dep_id] = len(rank)
            hidden.add(dep_id)
            queue.append(dep_id)
        if missing:
            raise MissingDependency(
                f"{node_id} depends on {', '.join(missing)}, which no attribute declares"
            )
        deps[node_id] = needed

    ordered = _level_order(deps, rank)
    outputs = tuple(
        AttributeGenerator(attr.name, GeneratorKind.COMPOSED, script=attr.source) for attr in model.attributes
    )
    plan = GenerationPlan(
        entity_type=model.entity_type,
        generators=tuple(nodes[n] for n in ordered),
        outputs=outputs,
        hidden=frozenset(hidden),
    )
    logger.debug("plan built entity=%s order=%s", plan.entity_type, ",".join(ordered))
    return plan
