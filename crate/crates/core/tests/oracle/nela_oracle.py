#!/usr/bin/env python3
"""Reference computation of the nela-open-v1 feature vector.

Written from the rule descriptions, with exact rational arithmetic, to
freeze tests/fixtures/golden_nela.json. Regenerate with

    python3 tests/oracle/nela_oracle.py > tests/fixtures/golden_nela.json
"""

import json
import os
import sys
from fractions import Fraction as F

HERE = os.path.dirname(os.path.abspath(__file__))
LEXICON_FILE = os.path.join(HERE, "..", "..", "src", "textfeat", "starter.lex")

ABBREVIATIONS = set("""Mr. Mrs. Ms. Dr. Prof. Sr. Jr. St. Mt. Gen. Gov. Sen. Rep. Rev. Capt. Col.
Lt. Sgt. Inc. Corp. Ltd. Co. vs. etc. e.g. i.e. U.S. U.K. U.N. E.U. a.m. p.m. No. Jan. Feb. Mar.
Apr. Aug. Sept. Sep. Oct. Nov. Dec.""".split())

TERMINATORS = ".!?"
CLOSERS = ".!?\"')]”’"
OPENERS = "([\"'“‘"


def sentences(text):
    out, start, i, n = [], 0, 0, len(text)
    while i < n:
        if text[i] not in TERMINATORS:
            i += 1
            continue
        end = i + 1
        while end < n and text[end] in CLOSERS:
            end += 1
        j = end
        while j < n and text[j].isspace():
            j += 1
        if j == n:
            boundary = True
        elif j == end:
            boundary = False
        else:
            k = j
            while k < n and text[k] in OPENERS:
                k += 1
            boundary = k < n and text[k].isupper()
        if boundary and text[i] == "." and end - i == 1:
            span = text[start:end]
            chunk = span.split()[-1] if span.split() else ""
            if chunk.lstrip(OPENERS) in ABBREVIATIONS:
                boundary = False
        if boundary:
            s = text[start:end].strip()
            if s:
                out.append(s)
            start = end
        i = end
    s = text[start:].strip()
    if s:
        out.append(s)
    return out


def tokens(text):
    out = []
    for chunk in text.split():
        word = ""
        for i, c in enumerate(chunk):
            if c.isalnum():
                word += c
                continue
            nxt = chunk[i + 1] if i + 1 < len(chunk) else ""
            keep = False
            if word and nxt:
                prev = chunk[i - 1]
                if c in "'’-":
                    keep = prev.isalnum() and nxt.isalnum()
                elif c in ".,":
                    keep = prev.isdigit() and nxt.isdigit()
            if keep:
                word += c
            else:
                if word:
                    out.append(word)
                    word = ""
                out.append(c)
        if word:
            out.append(word)
    return out


DET = "the a an this that these those every each some any no another such either neither all both".split()
PRON = """i me my mine myself we us our ours ourselves you your yours yourself yourselves he him his
himself she her hers herself it its itself they them their theirs themselves who whom whose which
what someone anyone everyone nobody something anything everything nothing""".split()
ADP = """of in on at by for with about against between into through during before after above below
from down over under around among across toward towards upon within without since until like near
via per despite""".split()
CONJ = "and or but nor so yet because although though while if unless whereas whether".split()
PRT = "to not up off out".split()
VERB = """is are was were be been being am have has had do does did will would shall should can could
may might must said says say don't doesn't didn't can't won't isn't aren't wasn't weren't""".split()
ADV = """very also just too then now here there never always often still already soon again even only
quite rather almost perhaps however""".split()
ASCII_PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"
UNI_PUNCT = "‘’“”–—…«»"
TAGS = ["noun", "verb", "adj", "adv", "pron", "det", "adp", "num", "conj", "prt", "punct", "x"]


def tag(tok):
    if not any(c.isalnum() for c in tok):
        return "punct" if all(c in ASCII_PUNCT or c in UNI_PUNCT for c in tok) else "x"
    if not any(c.isalpha() for c in tok):
        return "num"
    low = tok.lower().replace("’", "'")
    for words, t in ((DET, "det"), (PRON, "pron"), (ADP, "adp"), (CONJ, "conj"), (PRT, "prt"), (VERB, "verb"), (ADV, "adv")):
        if low in words:
            return t
    for suffix, t in (("ing", "verb"), ("ed", "verb"), ("ly", "adv"), ("ous", "adj"), ("ful", "adj")):
        if low.endswith(suffix) and len(low) >= len(suffix) + 3:
            return t
    return "noun"


def is_word(tok):
    return any(c.isalpha() for c in tok)


def norm(tok):
    return tok.lower().replace("’", "'")


def syllables(word):
    letters = [c for c in word.lower() if c.isalpha()]
    if not letters:
        return 0
    vowels = "aeiouy"
    groups, prev = 0, False
    for c in letters:
        v = c in vowels
        if v and not prev:
            groups += 1
        prev = v
    if groups > 1 and len(letters) >= 2 and letters[-1] == "e" and letters[-2] not in vowels:
        if not (len(letters) >= 3 and letters[-2] == "l" and letters[-3] not in vowels):
            groups -= 1
    return max(groups, 1)


def load_lexicons():
    lists, cur = {}, None
    with open(LEXICON_FILE, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#")[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                cur = line[1:-1].strip()
                lists.setdefault(cur, [])
                continue
            lists[cur].append(line)
    return lists


def matcher(terms):
    exact = {t for t in terms if not t.endswith("*")}
    prefixes = [t[:-1] for t in terms if t.endswith("*")]
    return lambda w: norm(w) in exact or any(norm(w).startswith(p) for p in prefixes)


STOPWORDS = """i me my myself we our ours ourselves you your yours yourself yourselves he him his himself
she her hers herself it its itself they them their theirs themselves what which who whom this that
these those am is are was were be been being have has had having do does did doing a an the and but
if or because as until while of at by for with about against between into through during before
after above below to from up down in out on off over under again further then once here there when
where why how all any both each few more most other some such no nor not only own same so than too
very s t can will just don should now""".split()
QUOTES = ["\"", "'", "“", "”", "‘", "’", "«", "»"]
PUNCT = [("exclamation", "!"), ("question", "?"), ("double_quote", "\""), ("single_quote", "'"),
         ("comma", ","), ("period", "."), ("colon", ":"), ("semicolon", ";")]
PRONOUNS = [
    ("first_person_singular_rate", "i me my mine myself".split()),
    ("first_person_plural_rate", "we us our ours ourselves".split()),
    ("second_person_rate", "you your yours yourself yourselves".split()),
    ("third_person_rate", "he him his himself she her hers herself it its itself they them their theirs themselves".split()),
]
FUNCTION_WORDS = """the of and to a in that is for it on was with he as at by but not this from have
be are they""".split()
BIAS = ["hedges", "factives", "assertives", "implicatives", "report_verbs", "bias_terms", "subjectivity_terms"]
MORAL = ["care_virtue", "care_vice", "fairness_virtue", "fairness_vice", "loyalty_virtue",
         "loyalty_vice", "authority_virtue", "authority_vice", "sanctity_virtue", "sanctity_vice"]
EPS = F(1e-9)


def rate(n, d):
    return F(0) if d == 0 else F(n, d)


def features(text, lex):
    toks = [t for s in sentences(text) for t in tokens(s)]
    n_sent = len(sentences(text))
    words = [t for t in toks if is_word(t)]
    T, W = len(toks), len(words)
    low = [norm(w) for w in words]
    f = {}
    tags = [tag(t) for t in toks]
    for t in TAGS:
        f["pos_" + t] = rate(tags.count(t), T)
    for name, mark in PUNCT:
        f["punct_" + name] = rate(toks.count(mark), T)
    allcaps = sum(1 for w in words if len([c for c in w if c.isalpha()]) >= 2 and all(c.isupper() for c in w if c.isalpha()))
    quotes = sum(1 for t in toks if t in QUOTES)
    for name, n in (("exclamation_per_1k", toks.count("!")), ("question_per_1k", toks.count("?")),
                    ("quote_per_1k", quotes), ("allcaps_per_1k", allcaps)):
        f[name] = rate(1000 * n, T)
    f["allcaps_word_rate"] = rate(allcaps, W)
    f["capitalized_word_rate"] = rate(sum(1 for w in words if w[0].isupper()), W)
    f["quote_rate"] = rate(quotes, T)
    f["stopword_rate"] = rate(sum(1 for w in low if w in STOPWORDS), W)
    f["contraction_rate"] = rate(sum(1 for w in low if "'" in w), W)
    for name, lst in PRONOUNS:
        f[name] = rate(sum(1 for w in low if w in lst), W)
    for w in FUNCTION_WORDS:
        f["fw_" + w] = rate(low.count(w), W)

    cx = ["type_token_ratio", "lexical_diversity", "mean_word_length", "mean_sentence_length",
          "mean_syllables_per_word", "flesch_kincaid_grade", "gunning_fog", "flesch_reading_ease",
          "complex_word_rate", "long_word_rate", "word_count", "sentence_count"]
    if W == 0 or n_sent == 0:
        for k in cx:
            f[k] = F(0)
    else:
        syl = [syllables(w) for w in words]
        wps = F(W, n_sent)
        spw = F(sum(syl), W)
        complex_ = sum(1 for s in syl if s >= 3)
        f["type_token_ratio"] = F(len({norm(t) for t in toks}), T)
        f["lexical_diversity"] = F(len(set(low)), W)
        f["mean_word_length"] = F(sum(len(w) for w in words), W)
        f["mean_sentence_length"] = F(T, n_sent)
        f["mean_syllables_per_word"] = spw
        f["flesch_kincaid_grade"] = F("0.39") * wps + F("11.8") * spw - F("15.59")
        f["gunning_fog"] = F("0.4") * (wps + 100 * F(complex_, W))
        f["flesch_reading_ease"] = F("206.835") - F("1.015") * wps - F("84.6") * spw
        f["complex_word_rate"] = F(complex_, W)
        f["long_word_rate"] = F(sum(1 for w in words if len(w) > 6), W)
        f["word_count"] = F(W)
        f["sentence_count"] = F(n_sent)

    m = {k: matcher(v) for k, v in lex.items()}
    for k in BIAS:
        f[k + "_rate"] = rate(sum(1 for w in words if m[k](w)), W)
    pos = sum(1 for w in words if m["positive"](w))
    neg = sum(1 for w in words if m["negative"](w))
    either = sum(1 for w in words if m["positive"](w) or m["negative"](w))
    pr, nr, ar = rate(pos, W), rate(neg, W), rate(either, W)
    f["positive_rate"], f["negative_rate"], f["affect_rate"] = pr, nr, ar
    f["polarity"] = (pr - nr) / (pr + nr + EPS)
    f["intensity"] = ar * (1 + rate(toks.count("!"), T))
    for k in MORAL:
        f[k + "_rate"] = rate(sum(1 for w in words if m[k](w)), W)
    return f


# Features whose reference values are compared with a tolerance rather than
# exactly: readability formulas with decimal coefficients and the two affect
# scores built from other floating-point quantities.
TOLERANCE = {
    "flesch_kincaid_grade": 1e-9,
    "gunning_fog": 1e-9,
    "flesch_reading_ease": 1e-9,
    "polarity": 1e-12,
    "intensity": 1e-12,
}

DOCUMENTS = [
    "the cat sat on the mat",
    "The cat sat.",
    "WOW!! Great?",
    'Mr. Smith said the U.S. budget grew 3.5% in 2018. "It is a disaster," he told reporters.',
    "Maybe the radical plan will reportedly fail. Critics allegedly feared harm!",
    "“We don’t know,” she said. They’re hopeful about the future.",
    "",
    "!!! ??? ...",
    "Loyal soldiers protect the nation. Traitors betray their country and cheat.",
    "You should read this: the well-known (and beautiful) report; it's AMAZING. "
    "Our team, however, quickly reported 1,000 cases. Why? Nobody knows!",
]


def main():
    lex = load_lexicons()
    docs = []
    for text in DOCUMENTS:
        f = features(text, lex)
        out = {}
        for k, v in f.items():
            entry = {"num": str(v.numerator), "den": str(v.denominator)}
            if k in TOLERANCE:
                entry["tolerance"] = TOLERANCE[k]
            out[k] = entry
        docs.append({"text": text, "features": out})
    json.dump({"catalog_version": "nela-open-v1", "documents": docs}, sys.stdout, indent=1, ensure_ascii=True)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
