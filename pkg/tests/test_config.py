import json
from pathlib import Path

import pytest

from fetchguard import ConfigError, PolicyConfig, default_config

REPO_ROOT = Path(__file__).resolve().parent.parent
DEFAULT_JSON = REPO_ROOT / "configs" / "default.json"


class TestDefaults:
    def test_shipped_default_validates_clean(self, shipped_config):
        assert shipped_config.validate().ok

    def test_checked_in_file_matches_code_defaults(self, shipped_config):
        loaded = PolicyConfig.load(DEFAULT_JSON)
        assert loaded.fingerprint() == shipped_config.fingerprint()

    def test_dict_roundtrip_preserves_fingerprint(self, shipped_config):
        clone = PolicyConfig.from_dict(shipped_config.to_dict())
        assert clone.fingerprint() == shipped_config.fingerprint()

    def test_fingerprint_ignores_formatting_but_not_content(self, tmp_path, shipped_config):
        pretty = tmp_path / "pretty.json"
        data = shipped_config.to_dict()
        pretty.write_text(json.dumps(data, indent=4))
        assert PolicyConfig.load(pretty).fingerprint() == shipped_config.fingerprint()

        data["durations"]["dangerous_s"] = 1801
        edited = tmp_path / "edited.json"
        edited.write_text(json.dumps(data))
        assert PolicyConfig.load(edited).fingerprint() != shipped_config.fingerprint()


def broken(mutate):
    data = default_config().to_dict()
    mutate(data)
    return PolicyConfig.from_dict(data)


class TestValidationFindings:
    def test_missing_matrix_row_reported(self):
        config = broken(lambda d: d["matrix"].pop())
        report = config.validate()
        assert "missing-key" in report.codes()

    def test_zone_hole_reported(self):
        config = broken(lambda d: d.__setitem__("zone_table", d["zone_table"][:1]))
        report = config.validate()
        assert "uncovered-point" in report.codes()

    def test_unknown_designator_reported(self):
        config = broken(lambda d: d["admin"]["designators"].append("ghost"))
        assert "unknown-designator" in config.validate().codes()

    def test_non_household_designator_reported(self):
        config = broken(lambda d: d["admin"]["designators"].append("erin"))
        assert "non-household-designator" in config.validate().codes()

    def test_unknown_rule_category_reported(self):
        config = broken(
            lambda d: d["category_rules"].append(
                {"category": "submarine", "extra_checks": [], "appropriate_rooms": None}
            )
        )
        assert "unknown-rule-category" in config.validate().codes()

    def test_tag_by_non_designator_reported(self):
        config = broken(
            lambda d: d["personal_tags"].append(
                {"object_id": "towel", "tagged_by": "bob", "grants": []}
            )
        )
        assert "tagger-not-designator" in config.validate().codes()

    def test_underage_grantee_reported(self):
        config = broken(
            lambda d: d["personal_tags"].__setitem__(
                0, {"object_id": "diary", "tagged_by": "alice", "grants": ["dave"]}
            )
        )
        assert "ineligible-grantee" in config.validate().codes()

    def test_duplicate_user_reported(self):
        config = broken(lambda d: d["users"].append(dict(d["users"][0])))
        assert "duplicate-user-id" in config.validate().codes()


class TestParseErrors:
    def test_duplicate_matrix_row_is_a_parse_error(self):
        data = default_config().to_dict()
        data["matrix"].append(dict(data["matrix"][0]))
        with pytest.raises(ConfigError, match="duplicate matrix row"):
            PolicyConfig.from_dict(data)

    def test_unknown_zone_name_is_a_parse_error(self):
        data = default_config().to_dict()
        data["zone_table"][0]["zone"] = "plaid"
        with pytest.raises(ConfigError):
            PolicyConfig.from_dict(data)

    def test_garbage_file_is_a_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            PolicyConfig.load(path)

    def test_unknown_safety_class_is_a_parse_error(self):
        data = default_config().to_dict()
        data["objects"][0]["safety_class"] = "spooky"
        with pytest.raises(ConfigError):
            PolicyConfig.from_dict(data)
