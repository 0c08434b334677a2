# JSON schemas for specs, configs and output records.
# Loaded lazily so "from schemas import WEIGHT_SPEC" reads the file on first use.
import importlib.resources
import json
from functools import lru_cache

from jsonschema import Draft202012Validator
from referencing import Registry, Resource

_FILES = {
    "WEIGHT_SPEC": "weight_spec.schema.json",
    "EXPERIMENT_CONFIG": "experiment_config.schema.json",
    "TEST_RESULT": "test_result.schema.json",
    "URN_RECORD": "urn_record.schema.json",
    "RAYKNIGHT_RECORD": "rayknight_record.schema.json",
}


def _load(filename: str) -> dict:
    text = importlib.resources.files(__name__).joinpath(filename).read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry() -> Registry:
    resources = []
    for filename in _FILES.values():
        contents = _load(filename)
        resources.append((contents["$id"], Resource.from_contents(contents)))
    return Registry().with_resources(resources)


@lru_cache(maxsize=None)
def validator(name: str) -> Draft202012Validator:
    """Validator for one of the schema names in _FILES."""
    if name not in _FILES:
        raise KeyError(f"unknown schema {name!r}")
    return Draft202012Validator(_load(_FILES[name]), registry=_registry())


def check(name: str, instance) -> list[str]:
    """Return human-readable schema errors; empty list means valid."""
    errors = sorted(validator(name).iter_errors(instance), key=lambda e: list(e.path))
    out = []
    for err in errors:
        where = "/".join(str(p) for p in err.path) or "<root>"
        out.append(f"{where}: {err.message}")
    return out


def __getattr__(name):
    if name in _FILES:
        schema = _load(_FILES[name])
        globals()[name] = schema
        return schema
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
