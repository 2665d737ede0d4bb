#!/usr/bin/env python3
"""Regenerates the recorded wiki/model fixtures under tests/fixtures.

Run from anywhere: python3 tests/fixtures/make_fixtures.py
Output is deterministic so regenerated files diff cleanly.
"""
import base64
import hashlib
import json
import shutil
import struct
import zlib
from pathlib import Path
from urllib.parse import quote

HERE = Path(__file__).resolve().parent
WIKI = "https://en.wikipedia.org/w/api.php"
COMMONS = "https://commons.wikimedia.org/w/api.php"
UPLOAD = "https://upload.wikimedia.org/wikipedia/commons"


def png(width, height, pixel):
    rows = b"".join(
        b"\x00" + b"".join(bytes(pixel(x, y)) for x in range(width)) for y in range(height)
    )

    def chunk(tag, data):
        body = tag + data
        return struct.pack(">I", len(data)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    header = struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0)
    return (b"\x89PNG\r\n\x1a\n" + chunk(b"IHDR", header) +
            chunk(b"IDAT", zlib.compress(rows, 9)) + chunk(b"IEND", b""))


def half_moon(x, y):
    dx, dy = x - 16, y - 20
    inside = dx * dx + dy * dy < 196 and dy < 0
    return (201, 140, 52) if inside else (250, 250, 250)


def disc(x, y):
    dx, dy = x - 16, y - 16
    inside = dx * dx + dy * dy < 150
    return (214, 160, 70) if inside else (250, 250, 250)


def flat(color):
    return lambda x, y: color


def api_url(base, **params):
    params = dict(params, format="json", formatversion="2")
    return base + "?" + "&".join(
        quote(k, safe="") + "=" + quote(str(v), safe="") for k, v in params.items())


class Recorder:
    def __init__(self, root):
        self.root = root
        if root.exists():
            shutil.rmtree(root)
        root.mkdir(parents=True)
        self.count = 0

    def add(self, name, url, body=None, status=200, content_type="application/json", raw=None):
        self.count += 1
        doc = {"request": url, "status": status, "content_type": content_type}
        if raw is not None:
            doc["body_base64"] = base64.b64encode(raw).decode()
        else:
            doc["body"] = body if isinstance(body, str) else json.dumps(body, indent=1)
        path = self.root / f"{self.count:03d}-{name}.json"
        path.write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n")


def parse_reply(title, html, categories=(), redirects=(), properties=None):
    cats = [{"sortkey": "", "category": c.replace(" ", "_")} for c in categories]
    cats.append({"sortkey": "", "category": "Articles_with_short_description", "hidden": True})
    parse = {"title": title, "pageid": zlib.crc32(title.encode()) % 100000, "text": html,
             "categories": cats, "properties": properties or {}}
    if redirects:
        parse["redirects"] = [{"from": r, "to": title} for r in redirects]
    return {"parse": parse}


def parse_url(title):
    return api_url(WIKI, action="parse", page=title, prop="text|categories|properties", redirects="1")


def images_url(title):
    return api_url(WIKI, action="query", prop="images", titles=title, imlimit="max", redirects="1")


def commons_category_url(title, cont=None):
    p = dict(action="query", list="categorymembers", cmtitle="Category:" + title, cmtype="file",
             cmlimit="max")
    if cont:
        p.update(cont)
    return api_url(COMMONS, **p)


def imageinfo_url(files):
    return api_url(COMMONS, action="query", prop="imageinfo", titles="|".join("File:" + f for f in files),
                   iiprop="url|size|mime|timestamp", iiurlwidth="1024")


def usage_url(file_name, cont=None):
    p = dict(action="query", prop="globalusage", titles="File:" + file_name, gulimit="500")
    if cont:
        p.update(cont)
    return api_url(COMMONS, **p)


def members_url(category):
    return api_url(WIKI, action="query", list="categorymembers", cmtitle="Category:" + category,
                   cmtype="page", cmnamespace="0", cmlimit="max")


def file_url(name):
    digest = hashlib.md5(name.replace(" ", "_").encode()).hexdigest()
    return f"{UPLOAD}/{digest[0]}/{digest[:2]}/{quote(name.replace(' ', '_'))}"


def thumb_url(name):
    digest = hashlib.md5(name.replace(" ", "_").encode()).hexdigest()
    n = quote(name.replace(" ", "_"))
    return f"{UPLOAD}/thumb/{digest[0]}/{digest[:2]}/{n}/1024px-{n}"


def imageinfo_reply(entries):
    pages = []
    for name, size, mime in entries:
        pages.append({"ns": 6, "title": "File:" + name, "imageinfo": [{
            "url": file_url(name), "thumburl": thumb_url(name), "size": size, "mime": mime,
            "timestamp": "2019-03-14T08:00:00Z"}]})
    return {"batchcomplete": True, "query": {"pages": pages}}


def usage_reply(file_name, uses, cont=None):
    page = {"ns": 6, "title": "File:" + file_name,
            "globalusage": [{"title": t, "wiki": w, "url": ""} for w, t in uses]}
    doc = {"query": {"pages": [page]}}
    if cont:
        doc["continue"] = dict(cont, **{"continue": "||"})
    return doc


# ---------------------------------------------------------------- gujia

GUJIA_HTML = """<div class="mw-parser-output"><div class="shortdescription nomobile noexcerpt">Sweet dumpling</div>
<table class="infobox"><tbody><tr><th>Gujia</th></tr><tr><td>Main ingredients: wheat flour, khoa, sugar</td></tr></tbody></table>
<p><b>Gujia</b> is a sweet fried dumpling eaten across northern India, most often during the Holi festival. It is a close relative of the <a href="/wiki/Chandrakala">chandrakala</a> and looks much like an <a href="/wiki/Empanada">empanada</a>.<sup class="reference"><a href="#cite_note-1">[1]</a></sup></p>
<div class="mw-heading mw-heading2"><h2 id="Description">Description</h2><span class="mw-editsection">[edit]</span></div>
<p>A thin round sheet of wheat dough is spread with sweetened <a href="/wiki/Khoa">khoa</a>, grated coconut and chopped dried fruit, then folded over once so the pastry forms a half-moon. The curved edge is pinched into a crimped, rope-like border that keeps the filling inside.</p>
<p>The dumplings are deep-fried in ghee until the crust is golden-brown, flaky and crisp. Some cooks dip them in sugar syrup afterwards, which leaves a glossy coating.</p>
<div class="mw-heading mw-heading2"><h2 id="History">History</h2></div>
<p>Fried sweets filled with milk solids have been made in the region for several centuries.</p>
<div class="mw-heading mw-heading2"><h2 id="References">References</h2></div>
<div class="reflist"><ol class="references"><li id="cite_note-1">A cookbook.</li></ol></div>
</div>"""

CHANDRAKALA_HTML = """<div class="mw-parser-output">
<p><b>Chandrakala</b> is a sweet pastry from India, fried and filled with khoa. It is related to the <a href="/wiki/Gujia">gujia</a>.</p>
<div class="mw-heading mw-heading2"><h2 id="Appearance">Appearance</h2></div>
<p>Two flat circles of dough are stacked with the filling between them and sealed, so the finished sweet is a round disc whose outline resembles the sun or a full moon. The rim is crimped all the way around, and a single clove is often pressed into the centre. The fried crust is golden-brown and may be soaked in sugar syrup.</p>
<div class="mw-heading mw-heading2"><h2 id="See_also">See also</h2></div>
<ul><li><a href="/wiki/Gujia">Gujia</a></li></ul>
</div>"""

GUJIA_IMAGE = png(32, 32, half_moon)
CHANDRAKALA_IMAGE = png(32, 32, disc)

BASE_QUESTIONS = [
    {"question": "What distinct shape does the sweet dumpling have?",
     "options": ["A) Round", "B) Half moon", "C) Square", "D) Triangular"],
     "correct_answer": "B) Half moon",
     "rationale": "The outline of the folded pastry is visible."},
    {"question": "How would you describe the texture of the outer layer?",
     "options": ["A) Smooth", "B) Flaky and crisp", "C) Sticky", "D) Spongy"],
     "correct_answer": "B) Flaky and crisp",
     "rationale": "Flaking of the fried crust shows in a close view."},
    {"question": "What is the typical color when fully prepared?",
     "options": ["A) Pale white", "B) Golden-brown", "C) Dark green", "D) Bright red"],
     "correct_answer": "B) Golden-brown",
     "rationale": "Color is directly visible."},
    {"question": "Which ingredient is most likely inside the filling?",
     "options": ["A) Khoa", "B) Chocolate", "C) Cheese", "D) Meat"],
     "correct_answer": "A) Khoa",
     "rationale": "A cut pastry would show the filling."},
    {"question": "Which element is least likely to be a visual feature of this sweet?",
     "options": ["A) Crimped edges", "B) Half moon shape", "C) Icing", "D) Golden crust"],
     "correct_answer": "C) Icing",
     "rationale": "Icing is not part of the pastry."},
    # Leaks the title; screening must drop it.
    {"question": "Why is gujia shaped like a half moon?",
     "options": ["A) It is folded once", "B) It is baked in a mould", "C) It is cut with a knife",
                 "D) It is rolled"],
     "correct_answer": "A) It is folded once",
     "rationale": "Folding a disc gives a half disc."},
]

BASE_RESPONSE = (
    "Reasoning: a person who has seen the sweet would recognise its folded outline, the "
    "crimped border, the fried crust and its color.\n\n"
    "```json\n" + json.dumps(BASE_QUESTIONS, indent=2) + "\n```\n")

CONTRAST_QUESTIONS = [
    {"question": "What is a key feature of the object in the image?",
     "options": ["A) Flat round disc outline", "B) Half-moon shaped",
                 "C) Sun-shaped using two dough circles", "D) Clove pressed into the center"],
     "correct_answer": "B) Half-moon shaped",
     "rationale": "Only one of the two sweets is folded into a half-moon."},
    {"question": "Which of the following is unique to the object shown?",
     "options": ["A) Clove pressed into the center", "B) Looks like an empanada",
                 "C) Associated with moonlight shape", "D) Flat round disc outline"],
     "correct_answer": "B) Looks like an empanada",
     "rationale": "The folded pastry resembles an empanada."},
    {"question": "How does the object differ from others?",
     "options": ["A) Flat round disc outline", "B) Uses a single layer of dough folded over",
                 "C) Clove pressed into the center", "D) Two circles for sun shape"],
     "correct_answer": "B) Uses a single layer of dough folded over",
     "rationale": "A fold line is visible along one side."},
    {"question": "What is visible in the image?",
     "options": ["A) Clove pressed into the center", "B) A shape that mimics an empanada",
                 "C) Rounded from a single circle of dough", "D) Sun shape made from two dough circles"],
     "correct_answer": "B) A shape that mimics an empanada",
     "rationale": "The outline is that of a folded turnover."},
]

CONTRAST_RESPONSE = """(set 1) Features distinct to A:
A. Half-moon shape
B. Looks like an empanada
C. Single layer of dough folded over
D. Crimped rope-like border along the fold

(set 2) Features distinct to B:
A. Sun shape made from two dough circles
B. Flat round disc outline
C. Clove pressed into the center
D. Round shape made from circles of dough
E. Full-moon outline associated with moonlight

(set 3) Features that both A and B have in common:
A. Golden-brown fried crust
B. Sweet khoa filling
C. Coating of sugar syrup

```json
""" + json.dumps(CONTRAST_QUESTIONS, indent=2) + "\n```\n"


def answer(letter_option, analysis):
    return f"Analysis: {analysis}\nFinal answer: {letter_option}"


ABSTAIN = ("Analysis: the inside of the pastry is not visible in the image.\n"
           "Final answer: I can't answer that based on the image.")


def gujia_script(gujia_hash, chandrakala_hash):
    entries = [
        {"match": {"contains": ["Generate as many questions as you can", "Article:"]},
         "response_text": BASE_RESPONSE},
        {"match": {"contains": ["Analyze the descriptions of Object A and Object B", "Object A:"]},
         "response_text": CONTRAST_RESPONSE},
    ]
    base_answers = {
        gujia_hash: ["B) Half moon", "A) Smooth", "B) Golden-brown", None, "C) Icing"],
        chandrakala_hash: ["A) Round", "A) Smooth", "B) Golden-brown", "A) Khoa", "B) Half moon shape"],
    }
    contrast_answers = {
        gujia_hash: [q["correct_answer"] for q in CONTRAST_QUESTIONS],
        chandrakala_hash: ["C) Sun-shaped using two dough circles", "C) Associated with moonlight shape",
                           "D) Two circles for sun shape", "C) Rounded from a single circle of dough"],
    }
    for h, picks in base_answers.items():
        for q, pick in zip(BASE_QUESTIONS, picks):
            entries.append({"match": {"contains": [q["question"]], "image_hash": h},
                            "response_text": ABSTAIN if pick is None else
                            answer(pick, "judging from the outline, color and surface in the photo.")})
    for h, picks in contrast_answers.items():
        for q, pick in zip(CONTRAST_QUESTIONS, picks):
            entries.append({"match": {"contains": [q["question"]], "image_hash": h},
                            "response_text": answer(pick, "the shape of the pastry is clearly visible.")})
    return {"entries": entries}


def separated_script(gujia_hash, chandrakala_hash):
    # Target answers every base question correctly, the distractor none.
    entries = [{"match": {"contains": ["Generate as many questions as you can", "Article:"]},
                "response_text": BASE_RESPONSE}]
    wrong = {q["question"]: next(o for o in q["options"] if o != q["correct_answer"]) for q in BASE_QUESTIONS}
    for q in BASE_QUESTIONS:
        entries.append({"match": {"contains": [q["question"]], "image_hash": gujia_hash},
                        "response_text": answer(q["correct_answer"], "visible.")})
        entries.append({"match": {"contains": [q["question"]], "image_hash": chandrakala_hash},
                        "response_text": answer(wrong[q["question"]], "visible.")})
    return {"entries": entries}


def write_gujia():
    root = HERE / "gujia"
    rec = Recorder(root / "wiki")
    rec.add("parse-gujia", parse_url("Gujia"),
            parse_reply("Gujia", GUJIA_HTML, ["Indian desserts", "Fried dough foods"]))
    rec.add("parse-chandrakala", parse_url("Chandrakala"),
            parse_reply("Chandrakala", CHANDRAKALA_HTML, ["Indian desserts", "Fried dough foods"]))
    files = {"Gujia": ("Gujia sweet.png", GUJIA_IMAGE),
             "Chandrakala": ("Chandrakala sweet.png", CHANDRAKALA_IMAGE)}
    for title, (name, data) in files.items():
        slug = title.lower()
        rec.add("images-" + slug, images_url(title), {"batchcomplete": True, "query": {"pages": [
            {"ns": 0, "title": title, "images": [{"ns": 6, "title": "File:" + name},
                                                 {"ns": 6, "title": "File:Commons-logo.svg"}]}]}})
        rec.add("commons-cat-" + slug, commons_category_url(title),
                {"batchcomplete": True, "query": {"categorymembers": []}})
        rec.add("imageinfo-" + slug, imageinfo_url([name]), imageinfo_reply([(name, len(data), "image/png")]))
        uses = [("en.wikipedia.org", title)] if title == "Chandrakala" else \
            [("en.wikipedia.org", "Gujia"), ("hi.wikipedia.org", "गुझिया"), ("en.wikipedia.org", "Holi")]
        rec.add("usage-" + slug, usage_url(name), usage_reply(name, uses))
        rec.add("bytes-" + slug, file_url(name), raw=data, content_type="image/png")
    members = {"Indian desserts": ["Chandrakala", "Gujia", "Gulab jamun", "Jalebi"],
               "Fried dough foods": ["Chandrakala", "Empanada", "Gujia"]}
    for cat, titles in members.items():
        rec.add("members-" + cat.lower().replace(" ", "-"), members_url(cat),
                {"query": {"categorymembers": [{"ns": 0, "title": t} for t in titles]}})
    gh = hashlib.sha256(GUJIA_IMAGE).hexdigest()
    ch = hashlib.sha256(CHANDRAKALA_IMAGE).hexdigest()
    (root / "model_script.json").write_text(json.dumps(gujia_script(gh, ch), indent=1) + "\n")
    (root / "model_script_separated.json").write_text(json.dumps(separated_script(gh, ch), indent=1) + "\n")
    (root / "hashes.json").write_text(json.dumps({"Gujia sweet.png": gh, "Chandrakala sweet.png": ch},
                                                 indent=1) + "\n")


# ---------------------------------------------------------------- misc wiki cases

def simple_article(title, body, links=()):
    anchors = " ".join(f'<a href="/wiki/{l.replace(" ", "_")}">{l}</a>' for l in links)
    return (f'<div class="mw-parser-output"><p><b>{title}</b> {body} {anchors}</p>'
            f'<h2 id="Description">Description</h2><p>{body}</p></div>')


def write_cases():
    rec = Recorder(HERE / "wiki_cases" / "wiki")

    # Caiman: shares two categories with Chinese alligator, one with Gharial.
    rec.add("parse-caiman", parse_url("Caiman"), parse_reply(
        "Caiman", simple_article("Caiman", "is a reptile with a broad snout and armoured skin.", ["Alligator"]),
        ["Alligatoridae", "Extant reptiles"]))
    rec.add("members-alligatoridae", members_url("Alligatoridae"), {"query": {"categorymembers": [
        {"ns": 0, "title": t} for t in ["Caiman", "Chinese Alligator", "American alligator"]]}})
    rec.add("members-extant-reptiles", members_url("Extant reptiles"), {"query": {"categorymembers": [
        {"ns": 0, "title": t} for t in ["Caiman", "Chinese Alligator", "Gharial"]]}})

    # Redirect: the lowercase request resolves to the canonical article.
    rec.add("parse-bluebird", parse_url("Western bluebird"), parse_reply(
        "Western Bluebird", simple_article("Western Bluebird", "is a small thrush with a blue back."),
        ["Sialia"], redirects=["Western bluebird"]))

    rec.add("parse-missing", parse_url("Nonexistent Thing"),
            {"error": {"code": "missingtitle", "info": "The page you specified doesn't exist."}})
    rec.add("parse-mercury", parse_url("Mercury"), parse_reply(
        "Mercury", '<div class="mw-parser-output"><p><b>Mercury</b> may refer to:</p><ul>'
        '<li><a href="/wiki/Mercury_(planet)">Mercury (planet)</a></li>'
        '<li><a href="/wiki/Mercury_(element)">Mercury (element)</a></li></ul></div>',
        properties={"disambiguation": ""}))

    # Lighthouse: 25 files in the Commons category, 2 more on the article.
    names = [f"Lighthouse {i:02d}.jpg" for i in range(1, 26)]
    rec.add("images-lighthouse", images_url("Lighthouse"), {"query": {"pages": [
        {"ns": 0, "title": "Lighthouse", "images": [{"ns": 6, "title": "File:Lighthouse diagram.svg"},
                                                    {"ns": 6, "title": "File:Lighthouse 03.jpg"}]}]}})
    rec.add("commons-cat-lighthouse-1", commons_category_url("Lighthouse"), {
        "continue": {"cmcontinue": "file|4c49474854484f55534520313520|15", "continue": "-||"},
        "query": {"categorymembers": [{"ns": 6, "title": "File:" + n} for n in names[:14]]}})
    rec.add("commons-cat-lighthouse-2", commons_category_url(
        "Lighthouse", {"cmcontinue": "file|4c49474854484f55534520313520|15", "continue": "-||"}),
        {"query": {"categorymembers": [{"ns": 6, "title": "File:" + n} for n in names[14:]]}})
    rec.add("imageinfo-lighthouse", imageinfo_url(names[:20]),
            imageinfo_reply([(n, 1000 + i, "image/jpeg") for i, n in enumerate(names[:20])]))

    rec.add("imageinfo-lighthouse-first", imageinfo_url(names[:1]),
            imageinfo_reply([(names[0], 1000, "image/jpeg")]))

    rec.add("images-blank", images_url("Blank stone"), {"query": {"pages": [
        {"ns": 0, "title": "Blank stone"}]}})
    rec.add("commons-cat-blank", commons_category_url("Blank stone"), {"query": {"categorymembers": []}})

    # Usage counts: one file on 1017 pages over three batches, one on 3, one unused.
    busy = "Busy file.jpg"
    uses = [("en.wikipedia.org", f"Page {i}") for i in range(1010)] + \
           [("de.wikipedia.org", f"Seite {i}") for i in range(7)]
    rec.add("usage-busy-1", usage_url(busy), usage_reply(busy, uses[:500], {"gucontinue": "en|Page 500"}))
    rec.add("usage-busy-2", usage_url(busy, {"gucontinue": "en|Page 500", "continue": "||"}),
            usage_reply(busy, uses[500:1000], {"gucontinue": "en|Page 1000"}))
    rec.add("usage-busy-3", usage_url(busy, {"gucontinue": "en|Page 1000", "continue": "||"}),
            usage_reply(busy, uses[1000:]))
    rec.add("usage-three", usage_url("Three uses.jpg"), usage_reply("Three uses.jpg", [
        ("en.wikipedia.org", "A"), ("en.wikipedia.org", "B"), ("fr.wikipedia.org", "A")]))
    rec.add("usage-unused", usage_url("Unused.jpg"), usage_reply("Unused.jpg", []))
    rec.add("usage-missing", usage_url("No such file.jpg"), {"query": {"pages": [
        {"ns": 6, "title": "File:No such file.jpg", "missing": True}]}})

    # Byte fetches: an oversized original with a thumbnail, and a dead link.
    big = png(8, 8, flat((10, 20, 30)))
    rec.add("bytes-huge-thumb", thumb_url("Huge.png"), raw=big, content_type="image/png")
    rec.add("bytes-gone", file_url("Gone.jpg"), body="not found", status=404, content_type="text/plain")
    rec.add("bytes-notimage", file_url("Fake.png"), body="<html>oops</html>", content_type="text/html")
    (HERE / "wiki_cases" / "huge_thumb.sha256").write_text(hashlib.sha256(big).hexdigest() + "\n")


# ---------------------------------------------------------------- corpora

MATERIAL = ["A) Bronze", "B) Marble", "C) Iron", "D) Wood"]

# (raw model output, expected outcome) against MATERIAL.
ANSWERS = [
    ("Analysis: The statue has a greenish patina.\nFinal answer: A) Bronze", "selected:0"),
    ("Analysis: smooth white stone.\nFinal answer: B", "selected:1"),
    ("Final answer: A", "selected:0"),
    ("Final answer: (C)", "selected:2"),
    ("Final answer: D.", "selected:3"),
    ("Final answer: Option B", "selected:1"),
    ("Final answer: Marble", "selected:1"),
    ("Final answer: iron", "selected:2"),
    ("Final answer: A) Bronze.", "selected:0"),
    ("final answer: c) iron", "selected:2"),
    ("**Final answer:** D) Wood", "selected:3"),
    ("Analysis: veined stone.\n\n**Final Answer**: B) Marble", "selected:1"),
    ("```\nAnalysis: dark metal with rust.\nFinal answer: C) Iron\n```", "selected:2"),
    ("```text\nFinal answer: D) Wood\n```\nThe grain is visible.", "selected:3"),
    ("Analysis: green tint.\nFinal answer: A) Bronze\n\nThe green tint suggests an oxidised copper alloy.",
     "selected:0"),
    ("Final answer: B) Marble, since the surface is white and polished.", "selected:1"),
    ("Final answer: I can't answer that based on the image.", "abstain"),
    ("Final answer: I can\u2019t answer that based on the image.", "abstain"),
    ("Analysis: the material is hidden by paint.\nFinal answer: I CAN'T ANSWER THAT BASED ON THE IMAGE",
     "abstain"),
    ("Analysis: too dark.\nFinal answer: 'I can't answer that based on the image.'", "abstain"),
    ("Analysis: only the base is visible.\nFinal answer: \"I can\u2019t answer that based on the image.\"",
     "abstain"),
    ("```\nFinal answer: I can't answer that based on the image.\n```", "abstain"),
    ("Final answer: probably metal?", "parse_failure"),
    ("The answer is B.", "parse_failure"),
    ("Analysis: I think it is bronze.", "parse_failure"),
    ("Final answer:\nB) Marble", "selected:1"),
    ("Final answer: E", "parse_failure"),
    ("Final answer: a", "selected:0"),
    ("Final answer: Bronze or Iron", "parse_failure"),
    ("Final answer: It looks like Wood", "selected:3"),
    ("Final answer: A) Bronze\nFinal answer: C) Iron", "selected:2"),
    ("- Final answer: B", "selected:1"),
    ("*Final answer: D) Wood*", "selected:3"),
    ("Final answer: C: Iron", "selected:2"),
    ("Final Answer - B", "parse_failure"),
    ("#### Final answer: A) Bronze", "selected:0"),
    ("{\"answer\": \"B\"}", "parse_failure"),
    ("Final answer: \u00af\\_(\u30c4)_/\u00af", "parse_failure"),
]


def question(stem, options, correct, rationale=""):
    return {"question": stem, "options": options, "correct_answer": correct, "rationale": rationale}


# Each record: concept title + aliases, question document, expected violations per question.
FLAWED = [
    ("leak in stem", "Gujia", [],
     [question("What makes a gujia flaky?", ["A) Ghee", "B) Water", "C) Milk", "D) Salt"], "A) Ghee")],
     [["leak"]]),
    ("leak in option", "Gujia", [],
     [question("How is the dough folded?", ["A) Gujia-style fold", "B) Twice", "C) Not at all", "D) Rolled"],
               "A) Gujia-style fold")],
     [["leak"]]),
    ("leak through alias", "Western Bluebird", ["Western bluebird", "Sialia mexicana"],
     [question("What color is the back of Sialia mexicana?", ["A) Blue", "B) Red", "C) Green"], "A) Blue")],
     [["leak"]]),
    ("leak through disambiguator-free title", "David (Donatello)", [],
     [question("Which hand of David holds the sword?", ["A) Left", "B) Right", "C) Neither"], "B) Right")],
     [["leak"]]),
    ("duplicate options", "Gujia", [],
     [question("What shape is it?", ["A) Round", "B) round ", "C) Square", "D) Oval"], "C) Square")],
     [["duplicate_option"]]),
    ("duplicate options without prefixes", "Gujia", [],
     [question("What shape is it?", ["Half moon", "Square", "HALF  MOON"], "Square")],
     [["duplicate_option"]]),
    ("correct answer not among options", "Gujia", [],
     [question("What shape is it?", ["A) Round", "B) Half moon", "C) Square", "D) Oval"], "Hexagon")],
     [["bad_correct_answer"]]),
    ("correct letter beyond options", "Gujia", [],
     [question("What shape is it?", ["A) Round", "B) Half moon", "C) Square"], "E) Hexagon")],
     [["bad_correct_answer"]]),
    ("two options", "Gujia", [],
     [question("Is it fried?", ["A) Yes", "B) No"], "A) Yes")],
     [["option_count"]]),
    ("six options", "Gujia", [],
     [question("What color?", ["Red", "Blue", "Green", "Brown", "White", "Black"], "Brown")],
     [["option_count"]]),
    ("empty stem", "Gujia", [],
     [question("   ", ["A) Red", "B) Blue", "C) Brown"], "C) Brown")],
     [["empty_stem"]]),
    ("leak and two options", "Gujia", [],
     [question("Is gujia fried?", ["A) Yes", "B) No"], "A) Yes")],
     [["leak", "option_count"]]),
    ("mixed document", "Statue of Liberty", ["Lady Liberty"],
     [question("What material is the statue made of?", ["A) Bronze", "B) Copper", "C) Marble", "D) Wood"],
               "B) Copper"),
      question("What does Lady Liberty hold aloft?", ["A) A torch", "B) A sword", "C) A book"], "A) A torch"),
      question("What color is the surface?", ["A) Green", "B) Green", "C) Gold"], "Purple"),
      question("Does it wear a crown?", ["A) Yes", "B) No"], "A) Yes")],
     [[], ["leak"], ["duplicate_option", "bad_correct_answer"], ["option_count"]]),
    ("valid base question", "David (Donatello)", [],
     [question("What is the statue made of?", ["A) Bronze", "B) Marble", "C) Iron", "D) Wood"], "A) Bronze")],
     [[]]),
    ("no false hit inside a longer word", "Ant", [],
     [question("What is the antenna length relative to the body?", ["A) Short", "B) Long", "C) Absent"],
               "B) Long")],
     [[]]),
]

VALID_QUIZZES = [
    {"concept_id": "gujia", "kind": "base", "distractor_concept_ids": [],
     "questions": [dict(q, options=q["options"]) for q in BASE_QUESTIONS[:5]]},
    {"concept_id": "gujia", "kind": "contrastive", "distractor_concept_ids": ["chandrakala"],
     "questions": [dict(q, source_features=[f]) for q, f in zip(CONTRAST_QUESTIONS, [
         "Half-moon shape", "Looks like an empanada", "Single layer of dough folded over",
         "Looks like an empanada"])]},
    {"concept_id": "david-donatello", "kind": "base", "distractor_concept_ids": [],
     "questions": [question("What is the statue made of?", ["A) Bronze", "B) Marble", "C) Iron", "D) Wood"],
                            "A) Bronze"),
                   question("Is the figure wearing a hat?", ["A) Yes", "B) No", "C) Only a helmet"], "A) Yes",
                            "The brimmed hat is visible from the front.")]},
    {"concept_id": "caf\u00e9-cr\u00e8me", "kind": "base", "distractor_concept_ids": [],
     "questions": [question("Which topping is visible?", ["A) Foam", "B) Cr\u00e8me br\u00fbl\u00e9e crust",
                                                          "C) Nothing", "D) Ice", "E) Sugar cubes"],
                            "A) Foam", "Foam is white and easy to spot.")]},
]


def matrix_10q():
    import random
    rng = random.Random(20260101)
    rows = []
    skill = [0.9, 0.8, 0.7, 0.65, 0.5, 0.4, 0.3, 0.2]
    for i, p in enumerate(skill):
        cells = []
        for _ in range(10):
            r = rng.random()
            cells.append("correct" if r < p else ("abstain" if r < p + 0.05 else "incorrect"))
        rows.append({"image_id": f"img{i + 1:02d}", "label": "target" if i < 5 else "distractor",
                     "cells": cells})
    return {"concept_id": "stored-ten", "quiz_kind": "base", "question_count": 10, "rows": rows}


def write_corpora():
    out = HERE / "corpora"
    out.mkdir(exist_ok=True)
    answers = [{"raw": raw, "options": MATERIAL, "expect": expect} for raw, expect in ANSWERS]
    (out / "final_answers.json").write_text(json.dumps(answers, indent=1, ensure_ascii=False) + "\n")
    flawed = [{"name": n, "concept": {"title": t, "aliases": a}, "document": d, "expected": e}
              for n, t, a, d, e in FLAWED]
    (out / "flawed_quizzes.json").write_text(json.dumps(flawed, indent=1, ensure_ascii=False) + "\n")
    valid = out / "valid_quizzes"
    if valid.exists():
        shutil.rmtree(valid)
    valid.mkdir()
    for i, quiz in enumerate(VALID_QUIZZES):
        (valid / f"quiz_{i}.json").write_text(json.dumps(quiz, indent=2, ensure_ascii=False) + "\n")
    (out / "matrix_10q.json").write_text(json.dumps(matrix_10q(), indent=1) + "\n")


if __name__ == "__main__":
    write_gujia()
    write_cases()
    write_corpora()
