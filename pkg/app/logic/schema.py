"""Descriptor documents: a strict XML subset naming what to generate and where to write it."""
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

from lxml import etree

from app.errors import (
    DuplicateAttributeName,
    DuplicateVariableName,
    InvalidCount,
    MalformedDocument,
    MissingRequiredAttribute,
    UnboundColumn,
    UndeclaredVariable,
    UnknownAttribute,
    UnknownElement,
    UnsupportedConsumer,
)
from app.logic.script import ScriptExpr, parse_script

CSV_EXPORTER_CLASS = "org.databene.platform.csv.CSVEntityExporter"

# element -> (required attributes, optional attributes)
_VOCABULARY: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    "setup": ((), ("defaultDataset",)),
    "import": (("domains",), ()),
    "generate": (("type", "count"), ()),
    "variable": (("name", "generator"), ("dataset", "locale")),
    "attribute": (("name", "script"), ()),
    "consumer": (("class",), ()),
    "property": (("name", "value"), ()),
}
_PARENT = {
    "import": "setup",
    "generate": "setup",
    "variable": "generate",
    "attribute": "generate",
    "consumer": "generate",
    "property": "consumer",
}
_CONSUMER_PROPERTIES = ("uri", "columns")
_ENCODING_DECL = re.compile(r"^(\s*<\?xml[^>]*?)\s+encoding\s*=\s*(['\"])[^'\"]*\2")


@dataclass(frozen=True)
class VariableSpec:
    name: str
    generator_id: str
    dataset_region: str = ""
    locale: str = ""


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    source: ScriptExpr


@dataclass(frozen=True)
class ConsumerSpec:
    uri: str
    columns: Tuple[str, ...]
    kind: str = "csv"


@dataclass(frozen=True)
class DescriptorModel:
    entity_type: str
    count: int
    variables: Tuple[VariableSpec, ...]
    attributes: Tuple[AttributeSpec, ...]
    consumer: ConsumerSpec
    dataset_region: str = ""
    domains: Tuple[str, ...] = field(default=())

    def attribute(self, name: str) -> Optional[AttributeSpec]:
        """Case-insensitive, whitespace-trimmed lookup."""
        key = name.strip().lower()
        for attr in self.attributes:
            if attr.name.lower() == key:
                return attr
        return None

    def variable(self, name: str) -> Optional[VariableSpec]:
        for var in self.variables:
            if var.name == name:
                return var
        return None


def _line(el) -> Optional[int]:
    return getattr(el, "sourceline", None)


def _check_element(el, source: Optional[str]) -> str:
    tag = el.tag
    if not isinstance(tag, str) or tag not in _VOCABULARY:
        raise UnknownElement(f"unknown element <{tag}>", source, _line(el))
    if el.text and el.text.strip():
        raise MalformedDocument(f"<{tag}> must not contain text", source, _line(el))
    if el.tail and el.tail.strip():
        raise MalformedDocument(f"unexpected text after <{tag}>", source, _line(el))

    required, optional = _VOCABULARY[tag]
    for name in el.attrib:
        if name not in required and name not in optional:
            raise UnknownAttribute(f"<{tag}> does not accept attribute {name!r}", source, _line(el))
    for name in required:
        if name not in el.attrib:
            raise MissingRequiredAttribute(f"<{tag}> requires attribute {name!r}", source, _line(el))

    parent = el.getparent()
    expected = _PARENT.get(tag)
    actual = parent.tag if parent is not None else None
    if expected != actual:
        raise MalformedDocument(f"<{tag}> is not allowed inside <{actual}>", source, _line(el))
    return tag


def _parse_count(raw: str, el, source: Optional[str]) -> int:
    value = raw.strip()
    if not re.fullmatch(r"\d+", value) or int(value) < 1:
        raise InvalidCount(f"count must be a positive integer, got {raw!r}", source, _line(el))
    return int(value)


def _split_columns(raw: str, el, source: Optional[str]) -> Tuple[str, ...]:
    cols = tuple(c.strip() for c in raw.split(","))
    if cols == ("",):
        raise MissingRequiredAttribute("consumer columns are empty", source, _line(el))
    if any(not c for c in cols):
        raise MalformedDocument(f"empty column name in {raw!r}", source, _line(el))
    return cols


def _parse_consumer(el, source: Optional[str]) -> ConsumerSpec:
    cls = el.get("class").strip()
    if cls != "csv" and cls.rsplit(".", 1)[-1] != "CSVEntityExporter":
        raise UnsupportedConsumer(f"consumer class {cls!r} is not a CSV exporter", source, _line(el))

    props: Dict[str, str] = {}
    for child in el:
        _check_element(child, source)
        name = child.get("name")
        if name not in _CONSUMER_PROPERTIES:
            raise UnknownAttribute(f"unknown consumer property {name!r}", source, _line(child))
        if name in props:
            raise MalformedDocument(f"consumer property {name!r} given twice", source, _line(child))
        props[name] = child.get("value")
    for name in _CONSUMER_PROPERTIES:
        if name not in props:
            raise MissingRequiredAttribute(f"consumer requires property {name!r}", source, _line(el))
    return ConsumerSpec(uri=props["uri"].strip(), columns=_split_columns(props["columns"], el, source))


def _to_tree(text: Union[str, bytes], source: Optional[str]):
    parser = etree.XMLParser(remove_comments=True, remove_pis=True, resolve_entities=False, no_network=True)
    if isinstance(text, str):
        # lxml refuses str input that still declares an encoding
        text = _ENCODING_DECL.sub(r"\1", text, count=1)
    try:
        return etree.fromstring(text, parser)
    except (etree.XMLSyntaxError, ValueError) as e:
        line = e.lineno if isinstance(e, etree.XMLSyntaxError) else None
        raise MalformedDocument(f"not a well-formed document: {e}", source, line) from e


def parse_descriptor(text: Union[str, bytes], source: Optional[str] = None) -> DescriptorModel:
    root = _to_tree(text, source)
    if root.tag != "setup":
        if isinstance(root.tag, str) and root.tag in _VOCABULARY:
            raise MalformedDocument(f"root element must be <setup>, got <{root.tag}>", source, _line(root))
        raise UnknownElement(f"unknown element <{root.tag}>", source, _line(root))
    _check_element(root, source)
    region = root.get("defaultDataset", "").strip()

    domains = []
    generates = []
    for child in root:
        tag = _check_element(child, source)
        if tag == "import":
            domains.append(child.get("domains").strip())
        else:
            generates.append(child)
    if len(generates) != 1:
        raise MalformedDocument(f"expected exactly one <generate>, found {len(generates)}", source, _line(root))
    gen = generates[0]

    variables = []
    attributes = []
    consumers = []
    for child in gen:
        tag = _check_element(child, source)
        if tag == "variable":
            name = child.get("name").strip()
            if any(v.name == name for v in variables):
                raise DuplicateVariableName(f"variable {name!r} declared twice", source, _line(child))
            dataset = child.get("dataset", region).strip()
            variables.append(VariableSpec(
                name=name,
                generator_id=child.get("generator").strip(),
                dataset_region=dataset,
                locale=child.get("locale", "").strip(),
            ))
        elif tag == "attribute":
            name = child.get("name").strip()
            if not name:
                raise MissingRequiredAttribute("attribute name is empty", source, _line(child))
            if any(a.name.lower() == name.lower() for a in attributes):
                raise DuplicateAttributeName(f"attribute {name!r} declared twice", source, _line(child))
            attributes.append(AttributeSpec(name=name, source=parse_script(child.get("script"))))
        else:
            consumers.append(_parse_consumer(child, source))

    if len(consumers) != 1:
        raise MalformedDocument(f"expected exactly one <consumer>, found {len(consumers)}", source, _line(gen))

    declared = {v.name for v in variables}
    for attr in attributes:
        for ref in attr.source.field_refs:
            if ref.variable not in declared:
                raise UndeclaredVariable(
                    f"attribute {attr.name!r} references undeclared variable {ref.variable!r}", source
                )

    model = DescriptorModel(
        entity_type=gen.get("type").strip(),
        count=_parse_count(gen.get("count"), gen, source),
        variables=tuple(variables),
        attributes=tuple(attributes),
        consumer=consumers[0],
        dataset_region=region,
        domains=tuple(domains),
    )
    for col in model.consumer.columns:
        if model.attribute(col) is None:
            raise UnboundColumn(f"consumer column {col!r} matches no attribute", source)
    return model


def serialize_descriptor(model: DescriptorModel) -> str:
    """Canonical document form; parse_descriptor() of the result equals `model`."""
    setup = etree.Element("setup")
    if model.dataset_region:
        setup.set("defaultDataset", model.dataset_region)
    for domain in model.domains:
        etree.SubElement(setup, "import", domains=domain)

    gen = etree.SubElement(setup, "generate", type=model.entity_type, count=str(model.count))
    for var in model.variables:
        el = etree.SubElement(gen, "variable", name=var.name, generator=var.generator_id)
        el.set("dataset", var.dataset_region)
        if var.locale:
            el.set("locale", var.locale)
    for attr in model.attributes:
        etree.SubElement(gen, "attribute", name=attr.name, script=str(attr.source))

    consumer = etree.SubElement(gen, "consumer")
    consumer.set("class", CSV_EXPORTER_CLASS)
    etree.SubElement(consumer, "property", name="uri", value=model.consumer.uri)
    etree.SubElement(consumer, "property", name="columns", value=", ".join(model.consumer.columns))

    body = etree.tostring(setup, pretty_print=True, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body
