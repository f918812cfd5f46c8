import pytest

from voxmerge import DomainError, PromptPair, prompt_diff


def diff(a, b):
    return prompt_diff(PromptPair(a, b))


def test_single_word_replacement():
    out = diff("a chicken riding a bike", "a cat riding a bike")
    assert out.status == "edit"
    assert len(out.hunks) == 1
    assert out.hunks[0].removed == ("chicken",)
    assert out.hunks[0].added == ("cat",)
    assert out.generic_text == "a object riding a bike"


def test_multi_token_replacement():
    out = diff("a skull warrior with a sword", "a skull warrior with a viking axe")
    assert out.removed_text == "sword"
    assert out.added_text == "viking axe"
    assert out.generic_text == "a skull warrior with a object"


def test_identical_prompts_report_no_edit():
    out = diff("a chicken riding a bike", "a chicken riding a bike")
    assert out.status == "no-edit"
    assert out.hunks == []
    assert out.generic_text == "a chicken riding a bike"


def test_case_folding_and_whitespace():
    out = diff("A  Chicken riding a bike", "a CAT riding a bike")
    assert out.hunks[0].removed == ("chicken",)
    assert out.hunks[0].added == ("cat",)


def test_multiple_disjoint_spans():
    out = diff("a red hat on a blue chair", "a green hat on a yellow chair")
    assert len(out.hunks) == 2
    assert out.hunks[0].removed == ("red",)
    assert out.hunks[0].added == ("green",)
    assert out.hunks[1].removed == ("blue",)
    assert out.hunks[1].added == ("yellow",)
    assert out.generic_text == "a object hat on a object chair"


def test_pure_insertion_keeps_generic_unchanged():
    out = diff("a chicken riding a bike", "a chicken with sunglasses riding a bike")
    assert out.status == "edit"
    assert len(out.hunks) == 1
    assert out.hunks[0].removed == ()
    assert out.hunks[0].added == ("with", "sunglasses")
    assert out.generic_text == "a chicken riding a bike"


def test_pure_deletion():
    out = diff("a happy ginger cat", "a ginger cat")
    assert out.hunks[0].removed == ("happy",)
    assert out.hunks[0].added == ()
    assert out.generic_text == "a object ginger cat"


def test_span_indices_point_into_token_lists():
    pair = PromptPair("a chicken riding a bike", "a cat riding a bike")
    out = prompt_diff(pair)
    i0, i1 = out.hunks[0].removed_span
    j0, j1 = out.hunks[0].added_span
    assert pair.input_tokens()[i0:i1] == ["chicken"]
    assert pair.edit_tokens()[j0:j1] == ["cat"]


def test_empty_prompt_rejected():
    with pytest.raises(DomainError):
        PromptPair("", "a cat")
    with pytest.raises(DomainError):
        PromptPair("a cat", "   ")
