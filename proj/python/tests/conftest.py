import json
import pathlib

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]


@pytest.fixture(scope="session")
def schema_registry():
    from referencing import Registry, Resource

    resources = []
    for path in sorted((ROOT / "docs").glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


@pytest.fixture(scope="session")
def schema(schema_registry):
    from jsonschema import Draft202012Validator

    def load(name):
        doc = json.loads((ROOT / "docs" / name).read_text())
        return Draft202012Validator(doc, registry=schema_registry)

    return load
