import json

from corpus import ALPHABET, formula_corpus
from monitorability.formula import Alphabet, TT, encode_ltl, parse_formula, parse_ltl
from monitorability.report import build_report, oracle_check

FSR = "f,s,r"


def test_report_keys():
    f = parse_formula("max X.([f]ff & [s]X & [r]X)")
    d = build_report(f, FSR, bound=3).as_dict()
    assert list(d) == ["formula", "alphabet", "level", "basis", "fragments", "witnesses", "oracle", "pz"]
    assert d["alphabet"] == ["f", "s", "r"]
    assert d["fragments"] == {"shml": True, "chml": False, "ehml": True, "ihml": "SIHML", "pihml": "SPIHML"}
    assert set(d["pz"]) == {"epz", "upz", "ffm"}
    assert set(d["pz"]["ffm"]) == {"ff?", "tt?", "ttff?"}
    assert d["oracle"]["disagreements"] == []


def test_report_without_modalities():
    d = build_report(TT).as_dict()
    assert d["alphabet"] is None and d["oracle"] is None and d["pz"] == {}


def test_report_json_round_trip():
    r = build_report(encode_ltl(parse_ltl("G F s"), FSR), FSR, bound=3, pz=False)
    data = json.loads(r.to_json())
    assert data["level"] == "SoundOnly" and data["pz"] == {}


def test_oracle_agrees_on_corpus():
    alpha = Alphabet.of(ALPHABET)
    for f in formula_corpus()[::10]:
        check = oracle_check(f, alpha, 1, 3)
        assert check.disagreements == (), check.disagreements
        assert check.agreements == 2 * (1 + len(ALPHABET))
