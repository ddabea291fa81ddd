"""Tests for the schema command."""

import json

import pytest

from nmlab.cli.commands.schema import SchemaName, json_schema


@pytest.mark.unit
@pytest.mark.parametrize("name", list(SchemaName))
def test_every_schema_builds(name):
    schema = json_schema(name)
    assert isinstance(schema, dict)
    assert schema


@pytest.mark.unit
def test_certificate_schema(cli_runner):
    result = cli_runner("schema", "certificate")
    assert result.exit_code == 0
    schema = json.loads(result.stdout)
    assert "classification" in schema["properties"]


@pytest.mark.unit
def test_weights_schema_is_tagged_union(cli_runner):
    schema = json.loads(cli_runner("schema", "weights").stdout)
    assert schema["discriminator"]["propertyName"] == "arch"
    assert len(schema["oneOf"]) == 4


@pytest.mark.unit
def test_unknown_schema(cli_runner):
    assert cli_runner("schema", "nope").exit_code == 2
