import json
import os
import pathlib
import shutil
import subprocess

import pytest
from referencing import Registry, Resource

ROOT = pathlib.Path(__file__).resolve().parents[2]
SCHEMAS = ROOT / "schemas"


@pytest.fixture(scope="session")
def cli():
    path = os.environ.get("DISTRESS_CLI") or shutil.which("distress_cli")
    if not path:
        pytest.skip("distress_cli not built")
    return path


@pytest.fixture(scope="session")
def run(cli):
    def go(*args, check=True):
        proc = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
        if check and proc.returncode != 0:
            raise AssertionError(proc.stderr)
        return proc

    return go


@pytest.fixture(scope="session")
def schema():
    resources = []
    for p in SCHEMAS.glob("*.json"):
        resources.append((p.name, Resource.from_contents(json.loads(p.read_text()))))
    registry = Registry().with_resources(resources)

    def load(name):
        return json.loads((SCHEMAS / name).read_text()), registry

    return load
