"""Published JSON schemas (mesh, scenario, report) and validation helpers.

Schema ids carry the version (``wittenhodge.<kind>/<n>``); any change to a
format bumps the number here and in the corresponding ``*_SCHEMA`` constant.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .errors import ValidationError

KINDS = ("mesh", "scenario", "report")


@lru_cache(maxsize=None)
def load_schema(kind):
    if kind not in KINDS:
        raise KeyError(kind)
    text = resources.files(__package__).joinpath(
        "schemas", f"{kind}.schema.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _validator(kind):
    schema = load_schema(kind)
    cls = jsonschema.validators.validator_for(schema)
    return cls(schema)


def validate(doc, kind):
    """Raise :class:`ValidationError` with the first schema violation."""
    err = jsonschema.exceptions.best_match(_validator(kind).iter_errors(doc))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ValidationError(f"{kind} document invalid at {where}: {err.message}",
                              schema=load_schema(kind)["$id"])
