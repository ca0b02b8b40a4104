#!/usr/bin/env python3
"""Regenerates the checked-in fixtures under tests/fixtures.

Aggregate targets (per-criterion counts, win/tie counts, context histogram) are
hard-coded below; the individual rows are synthetic and drawn from a fixed seed.
Drafts (tag + content) are sealed into replay recordings by seal_recording so
every entry carries the current prompt digest:

    python3 tools/fixtures/generate_fixtures.py --seal build/tools/seal_recording
"""
import argparse
import json
import random
import subprocess
from pathlib import Path

import numpy as np
from scipy import stats

ROOT = Path(__file__).resolve().parents[2]
OUT = ROOT / "tests" / "fixtures"

CRITERIA = [
    "fail-elicit-tacit-assumptions",
    "fail-consider-alternatives",
    "no-clarification-when-unclear",
    "no-clarification-when-contradictory",
    "fail-elicit-tacit-knowledge",
    "ask-generic-question",
    "ask-long-question",
    "use-jargon",
    "ask-technical-question",
    "ask-inappropriate-question",
    "ask-for-solutions",
    "ask-multiple-requirements",
    "ask-vague-multiple-interpretations",
    "ask-vague-no-meaning",
]
# (human, model, agreements out of 30) per criterion, catalog order
AGREEMENT = [
    (19, 25, 20), (30, 28, 28), (20, 16, 18), (7, 2, 25), (21, 20, 21), (7, 10, 27), (11, 7, 26),
    (7, 1, 24), (5, 1, 26), (5, 0, 25), (6, 2, 26), (7, 12, 23), (27, 27, 28), (5, 12, 23),
]
# questions (of 30) that still demonstrate each mistake after multi-avoidance prompting
MULTI_DEMONSTRATIONS = [7, 22, 9, 5, 3, 1, 3, 0, 0, 0, 0, 12, 2, 2]
# (model win, human win, tie) of 128 pairs and target mean scores (model, human)
WIN_TIE = {
    "RELEVANCY": ((76, 27, 25), (4.4, 3.5)),
    "CLARITY": ((54, 22, 52), (4.5, 3.9)),
    "INFORMATIVENESS": ((61, 33, 34), (4.1, 3.6)),
}
BT_MODEL_WINS, BT_PAIRS = 87, 128
# Study 1 targets: (human mean, model mean, two-sided p)
STUDY1 = {
    "INFORMATIVENESS": (4.6, 4.8, 0.17),
    "RELEVANCY": (4.8, 5.0, 0.08),
    "CLARITY": (4.9, 5.1, 0.10),
}

# speech / human follow-up / topic noun, per domain
BANK = {
    "apartment": [
        ("I mostly look on listing sites and filter by price first, then I check how far it is from work.",
         "How far from work is too far for you?", "the commute"),
        ("Last time the photos looked great but the place was much smaller when I visited.",
         "What did you do after you saw it was smaller than the photos?", "the listing photos"),
        ("I need a place that allows pets because I have a dog.",
         "Do you have a dog?", "the pet policy"),
        ("My roommate and I split the rent so we both have to agree on the place.",
         "How do you and your roommate decide when you disagree about a place and what about the lease and the deposit and utilities?",
         "the roommate agreement"),
        ("The landlord was slow to answer emails so I gave up on that one.",
         "What is a reasonable response time from a landlord?", "landlord responsiveness"),
        ("I always check reviews of the building management before applying.",
         "Where do you read those reviews?", "building reviews"),
        ("Laundry in the unit is kind of a must for me now.",
         "What is your preferred HVAC and washer hookup configuration?", "in-unit laundry"),
        ("I ended up paying an application fee for three places before I got one.",
         "How would you design an app that waives application fees?", "application fees"),
    ],
    "restaurant": [
        ("Usually I look at the ratings on a map app and pick something close by.",
         "What rating is good enough for you?", "the ratings"),
        ("If I'm with friends we end up wherever someone has been before.",
         "So you go where a friend has already been?", "friend recommendations"),
        ("I'm vegetarian so the menu matters more to me than the reviews.",
         "What do you think about the menu?", "the menu"),
        ("Sometimes the wait is so long that we just leave and go somewhere else.",
         "How long is too long to wait?", "the wait time"),
        ("Price is important but I'll pay more for a special occasion.",
         "What counts as a special occasion for you?", "special occasions"),
        ("I like places where I can book a table online.",
         "What kind of API does the booking system expose?", "online booking"),
        ("Photos of the food tell me more than the written reviews do.",
         "Why do you think the photos are more honest than the written reviews people leave?",
         "food photos"),
        ("We tried a new place last week and the service was terrible.",
         "Anything else?", "the service"),
    ],
    "trail": [
        ("I check the weather the night before and again in the morning.",
         "What do you do if the forecast changes in the morning?", "the forecast"),
        ("The length of the trail matters because my kids get tired quickly.",
         "How long a trail can your kids handle?", "trail length"),
        ("I use an app that shows the elevation profile.",
         "Which app is that and what do you like about it?", "the elevation profile"),
        ("Parking fills up early at the popular trailheads.",
         "What time do you usually arrive?", "trailhead parking"),
        ("I always tell someone where I am going before I leave.",
         "Who do you tell?", "the trip plan"),
        ("Sometimes trail conditions online are out of date.",
         "How do you find out the real conditions?", "trail conditions"),
        ("I like loops more than out-and-back trails.",
         "What is the optimal loop topology for a trail network?", "loop trails"),
        ("My friend got lost once because the trail markers were missing.",
         "Things?", "trail markers"),
    ],
    "clinic": [
        ("I first check whether the clinic takes my insurance.",
         "How do you check that the clinic takes your insurance?", "insurance coverage"),
        ("If it is urgent I just go to the closest walk-in clinic.",
         "What makes something urgent for you?", "urgency"),
        ("I read reviews but they are mostly about the front desk staff.",
         "What would you rather the reviews tell you?", "clinic reviews"),
        ("Waiting times are posted online for some clinics.",
         "Do you trust the posted waiting times?", "posted wait times"),
        ("My doctor's office is hard to get an appointment at so I use urgent care.",
         "How far ahead do you have to book with your doctor?", "appointment availability"),
        ("I prefer clinics where I can check in on my phone.",
         "What EHR integration standard should the check-in use?", "mobile check-in"),
        ("Last time they sent me to a different clinic for an x-ray.",
         "How did you feel about having to go somewhere else and did it change how you pick clinics and what do you wish had happened?",
         "referrals"),
        ("I care a lot about whether the doctor explains things clearly.",
         "Is that important?", "how the doctor explains"),
    ],
}

GUIDED = {
    "fail-elicit-tacit-assumptions": "What are you taking for granted about {t} that you have never checked?",
    "fail-consider-alternatives": "Besides {t}, what other options have you tried or considered?",
    "no-clarification-when-unclear": "When you mention {t}, what exactly do you mean?",
    "no-clarification-when-contradictory": "Earlier you described {t} differently, which version fits your experience better?",
    "fail-elicit-tacit-knowledge": "What do you know about {t} now that you wish you had known the first time?",
    "ask-generic-question": "In your search, how does {t} affect your final choice?",
    "ask-long-question": "How does {t} affect your choice?",
    "use-jargon": "How much does {t} matter to you?",
    "ask-technical-question": "What would make {t} easier for you?",
    "ask-inappropriate-question": "Could you tell me about a time {t} surprised you?",
    "ask-for-solutions": "What problems have you run into with {t}?",
    "ask-multiple-requirements": "How important is {t} to you?",
    "ask-vague-multiple-interpretations": "How often does {t} change your plans?",
    "ask-vague-no-meaning": "What happened the last time {t} went wrong?",
}
ANALYST = {
    "fail-elicit-tacit-assumptions": "Why do you think {t} works that way?",
    "fail-consider-alternatives": "Is {t} the only thing you look at?",
    "no-clarification-when-unclear": "Can you say more about {t}?",
    "no-clarification-when-contradictory": "Did {t} change over time?",
    "fail-elicit-tacit-knowledge": "Is there anything you learned about {t}?",
    "ask-generic-question": "How do you usually handle {t}?",
    "ask-long-question": "What about {t}?",
    "use-jargon": "Tell me how {t} fits into your process?",
    "ask-technical-question": "How would you improve {t}?",
    "ask-inappropriate-question": "What do you like about {t}?",
    "ask-for-solutions": "What is hard about {t}?",
    "ask-multiple-requirements": "How do you feel about {t}?",
    "ask-vague-multiple-interpretations": "Does {t} matter a lot?",
    "ask-vague-no-meaning": "What else about {t}?",
}
MULTI = [
    "What do you usually check about {t} before you decide?",
    "How did {t} work out the last time you searched?",
    "Which part of {t} takes you the most time?",
    "What would you do differently about {t} next time?",
    "When {t} goes badly, what do you do next?",
]
MINIMAL = [
    "Can you walk me through how {t} played out last time?",
    "What makes {t} important to you?",
    "How do you decide whether {t} is good enough?",
    "What have you learned to watch out for with {t}?",
]
OPENERS = {
    "apartment": "How do you find an apartment?",
    "restaurant": "How do you choose a restaurant to eat at?",
    "trail": "How do you plan a trail hike in a park?",
    "clinic": "How do you choose a clinic to visit when you get sick?",
}
TOPIC_CHANGES = {
    "apartment": ["Let's switch to moving day. How did that go?", "How do you handle the lease signing?"],
    "restaurant": ["Moving on, how do you pay when you eat out with a group?", "How do you pick a place for a date?"],
    "trail": ["Let's talk about gear. What do you bring?", "How do you pick who comes along?"],
    "clinic": ["Switching topics, how do you get your prescriptions filled?", "How do you keep track of your visits?"],
}
DOMAINS = list(BANK)


def write(path, text):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def tsv(columns, rows):
    esc = lambda v: str(v).replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")
    return "\t".join(columns) + "\n" + "".join("\t".join(esc(v) for v in r) + "\n" for r in rows)


def jsonl(rows):
    return "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in rows)


def draft(entries):
    return jsonl({"tag": tag, "content": content} for tag, content in entries)


def corpus(rng):
    pairs = []
    items = [(d, e) for d in DOMAINS for e in BANK[d]]
    rng.shuffle(items)
    for n, (domain, (speech, question, topic)) in enumerate(items[:30]):
        pairs.append({"id": f"r{n + 1:03d}", "session": f"t{n % 14 + 1:02d}", "domain": domain,
                      "speech": speech, "question": question, "topic": topic})
    return pairs


def classification(rng, pairs):
    ids = [p["id"] for p in pairs]
    human, model = {}, {}
    for crit, (h, m, agree) in zip(CRITERIA, AGREEMENT):
        both = (h + m - (30 - agree)) // 2
        assert h + m - 2 * both == 30 - agree and 0 <= both <= min(h, m)
        order = ids[:]
        rng.shuffle(order)
        hs = set(order[:h])
        ms = set(order[:both]) | set(order[h:h + m - both])
        for r in ids:
            human[(r, crit)] = r in hs
            model[(r, crit)] = r in ms
    return human, model


def multi_matrix(rng):
    """Row sums: one row 0, two rows >= 4, the rest 1..3; column sums fixed."""
    total = sum(MULTI_DEMONSTRATIONS)
    while True:
        rows = [0, 6, 5] + [1] * 27
        spare = total - sum(rows)
        while spare > 0:
            i = rng.randrange(3, 30)
            if rows[i] < 3:
                rows[i] += 1
                spare -= 1
        remaining = rows[:]
        matrix = [[False] * len(CRITERIA) for _ in range(30)]
        ok = True
        for c in sorted(range(len(CRITERIA)), key=lambda c: -MULTI_DEMONSTRATIONS[c]):
            cand = sorted(range(30), key=lambda r: (-remaining[r], rng.random()))
            need = MULTI_DEMONSTRATIONS[c]
            chosen = [r for r in cand if remaining[r] > 0][:need]
            if len(chosen) < need:
                ok = False
                break
            for r in chosen:
                matrix[r][c] = True
                remaining[r] -= 1
        if ok and not any(remaining):
            rng.shuffle(matrix)
            return matrix


def transcripts(rng):
    """14 sessions, 146 interviewer questions, annotations shaped to the context histogram."""
    counts = [11] * 6 + [10] * 8
    rng.shuffle(counts)
    required = [0] * 71 + [1] * 33 + [2] * 18 + [3] * 13 + [4] * 9 + [5, 6]
    sessions, annotations = {}, []
    rest = required[:]
    for _ in range(14):
        rest.remove(0)
    rng.shuffle(rest)
    # index-0 questions must need zero context; everything else is at least turn 2
    for s, n in enumerate(counts):
        domain = DOMAINS[s % 4]
        sid = f"t{s + 1:02d}"
        turns, bank = [], BANK[domain][:]
        rng.shuffle(bank)
        mins = [rest.pop() for _ in range(n - 1)]
        while any(need > 2 * (q + 1) for q, need in enumerate(mins)):
            rng.shuffle(mins)
        mins = [0] + mins
        for q in range(n):
            need = mins[q]
            if need == 0:
                text = OPENERS[domain] if q == 0 else rng.choice(TOPIC_CHANGES[domain])
                qtype = "TOPIC_CHANGE"
            elif need == 1:
                text = bank[(q - 1) % len(bank)][1]
                qtype = rng.choice(["ANSWER_PROBING"] * 5 + ["CONFIRMATION"] * 2 + ["CLARIFICATION"] * 2)
            else:
                text = bank[(q - 1) % len(bank)][1]
                qtype = rng.choice(["QUESTION_PROBING"] * 3 + ["ALTERNATIVE_SEEKING"] * 2 + ["PREFERENCE_SEEKING"] * 2)
            idx = len(turns)
            turns.append({"index": idx, "speaker": "INTERVIEWER", "text": text})
            annotations.append((sid, idx, need, qtype))
            turns.append({"index": idx + 1, "speaker": "INTERVIEWEE", "text": bank[q % len(bank)][0]})
        sessions[sid] = turns
    assert sum(counts) == 146 and len(annotations) == 146
    return sessions, annotations


def hit_sums(rng, outcomes, target_m, target_h, scale):
    """Scores per pair with the outcome fixed; adjusted until both sums hit target."""
    scores = []
    for o in outcomes:
        base = rng.randint(2, scale - 1)
        if o == "model":
            scores.append([min(scale, base + 1), base])
        elif o == "human":
            scores.append([base, min(scale, base + 1)])
        else:
            scores.append([base, base])

    def valid(o, m, h):
        if not (1 <= m <= scale and 1 <= h <= scale):
            return False
        return m > h if o == "model" else h > m if o == "human" else m == h

    for _ in range(200000):
        dm = target_m - sum(s[0] for s in scores)
        dh = target_h - sum(s[1] for s in scores)
        if dm == 0 and dh == 0:
            return scores
        i = rng.randrange(len(scores))
        o, (m, h) = outcomes[i], scores[i]
        moves = [(m + a, h + b) for a in (-1, 0, 1) for b in (-1, 0, 1) if a or b]
        rng.shuffle(moves)
        for nm, nh in moves:
            err = abs(dm - (nm - m)) + abs(dh - (nh - h))
            if valid(o, nm, nh) and err <= abs(dm) + abs(dh):
                scores[i] = [nm, nh]
                break
    raise RuntimeError("could not hit target sums")


def study1_ratings(rng, model_ids, human_ids):
    """10 raters per question on a 6-point scale; per-question means tuned to the targets."""
    rows = []
    for dim, (h_mean, m_mean, p_target) in STUDY1.items():
        def fresh(mean):
            return [[min(6, max(1, round(rng.gauss(mean, 0.9)))) for _ in range(10)] for _ in range(20)]

        mat = {"MODEL": fresh(m_mean), "HUMAN": fresh(h_mean)}

        def score():
            mm = np.array([np.mean(q) for q in mat["MODEL"]])
            hm = np.array([np.mean(q) for q in mat["HUMAN"]])
            p = stats.ttest_ind(mm, hm).pvalue
            return abs(mm.mean() - m_mean) * 10 + abs(hm.mean() - h_mean) * 10 + abs(np.log(p / p_target))

        cur = score()
        for _ in range(40000):
            if cur < 0.02:
                break
            side = rng.choice(["MODEL", "HUMAN"])
            q, r = rng.randrange(20), rng.randrange(10)
            old = mat[side][q][r]
            new = old + rng.choice([-1, 1])
            if not 1 <= new <= 6:
                continue
            mat[side][q][r] = new
            s = score()
            if s <= cur:
                cur = s
            else:
                mat[side][q][r] = old
        for side, ids in (("MODEL", model_ids), ("HUMAN", human_ids)):
            for q, item in enumerate(ids):
                group = (q // 10) + (0 if side == "MODEL" else 2)
                for r in range(10):
                    rows.append((f"u{group * 10 + r + 1:02d}", item, side, dim, mat[side][q][r], 6))
    rows.sort()
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seal", help="path to seal_recording; drafts are sealed when given")
    ap.add_argument("--seed", type=int, default=20250721)
    args = ap.parse_args()
    rng = random.Random(args.seed)

    # --- classification corpus -------------------------------------------------
    pairs = corpus(rng)
    write(OUT / "classification" / "pairs.tsv",
          tsv(["record_id", "session_id", "interviewee_speech", "interviewer_question", "domain_keyword"],
              [(p["id"], p["session"], p["speech"], p["question"], p["domain"]) for p in pairs]))
    human, model = classification(rng, pairs)
    write(OUT / "classification" / "human_labels.tsv",
          tsv(["record_id", "criterion_id", "demonstrates_mistake"],
              [(r, c, int(human[(r, c)])) for r in [p["id"] for p in pairs] for c in CRITERIA]))
    # the classifier answers whether the positive standard is met
    write(OUT / "drafts" / "classify.jsonl",
          draft((f"classify:{r}:{c}:0", "No" if model[(r, c)] else "Yes") for (r, c) in sorted(model)))

    by_id = {p["id"]: p for p in pairs}
    write(OUT / "drafts" / "minimal.jsonl",
          draft((f"minimal:{p['id']}:-:0", rng.choice(MINIMAL).format(t=p["topic"])) for p in pairs))

    # --- guided generation over cells both raters flagged ------------------------
    flags = sorted(k for k in human if human[k] and model[k])
    assert len(flags) == 130
    write(OUT / "guided" / "flags.tsv", tsv(["record_id", "criterion_id"], flags))
    write(OUT / "drafts" / "guided.jsonl",
          draft((f"guided:{r}:{c}:0", GUIDED[c].format(t=by_id[r]["topic"])) for r, c in flags))

    # Study 3 keeps 128 of them (two dropped, both for the criterion with most flags)
    dropped = [k for k in flags if k[1] == "fail-consider-alternatives"][:2]
    kept = [k for k in flags if k not in dropped]
    assert len(kept) == 128
    records = []
    for r, c in kept:
        p = by_id[r]
        base = {"id": f"{r}/{c}", "session_id": p["session"], "domain_keyword": p["domain"],
                "context": [{"index": 0, "speaker": "INTERVIEWEE", "text": p["speech"]}],
                "interviewee_speech": p["speech"], "criterion_id": c}
        records.append({**base, "question": GUIDED[c].format(t=p["topic"]), "source": "MODEL"})
        records.append({**base, "question": ANALYST[c].format(t=p["topic"]), "source": "HUMAN_ANALYST"})
    write(OUT / "study3" / "questions.jsonl", jsonl(records))

    # --- multi-avoidance ---------------------------------------------------------
    matrix = multi_matrix(rng)
    entries = [(f"multi:{p['id']}:-:0", MULTI[i % len(MULTI)].format(t=p["topic"])) for i, p in enumerate(pairs)]
    for row, p in zip(matrix, pairs):
        for c, dem in zip(CRITERIA, row):
            entries.append((f"multi-classify:{p['id']}:{c}:0", "No" if dem else "Yes"))
    write(OUT / "drafts" / "multi.jsonl", draft(sorted(entries)))

    # --- transcripts and context annotations -------------------------------------
    sessions, annotations = transcripts(rng)
    for sid, turns in sessions.items():
        write(OUT / "context" / "transcripts" / f"{sid}.jsonl", jsonl(turns))
    write(OUT / "context" / "annotations.tsv",
          tsv(["session_id", "question_turn_index", "required_turns", "question_type"], annotations))

    # --- Study 3 outcomes ----------------------------------------------------------
    pair_ids = [f"{r}/{c}" for r, c in kept]
    rng.shuffle(pair_ids)
    rater_of = {pid: f"p{i // 4 + 1:02d}" for i, pid in enumerate(pair_ids)}
    winners = ["MODEL"] * BT_MODEL_WINS + ["HUMAN"] * (BT_PAIRS - BT_MODEL_WINS)
    rng.shuffle(winners)
    write(OUT / "study3" / "comparisons.tsv",
          tsv(["rater_id", "pair_id", "winner"], sorted((rater_of[p], p, w) for p, w in zip(pair_ids, winners))))
    rating_rows = []
    for dim, ((mw, hw, tie), (m_mean, h_mean)) in WIN_TIE.items():
        outcomes = ["model"] * mw + ["human"] * hw + ["tie"] * tie
        rng.shuffle(outcomes)
        scores = hit_sums(rng, outcomes, round(m_mean * 128), round(h_mean * 128), 5)
        for pid, (m, h) in zip(pair_ids, scores):
            rating_rows.append((rater_of[pid], pid, "MODEL", dim, m, 5))
            rating_rows.append((rater_of[pid], pid, "HUMAN", dim, h, 5))
    rating_rows.sort()
    write(OUT / "study3" / "ratings.tsv",
          tsv(["rater_id", "item_id", "source", "dimension", "score", "scale_size"], rating_rows))

    # --- Study 1 -----------------------------------------------------------------
    s1_model, s1_human = [], []
    for i, p in enumerate(pairs[:20]):
        base = {"session_id": p["session"], "domain_keyword": p["domain"],
                "context": [{"index": 0, "speaker": "INTERVIEWEE", "text": p["speech"]}],
                "interviewee_speech": p["speech"]}
        s1_model.append({**base, "id": f"m{i + 1:02d}", "source": "MODEL",
                         "question": MINIMAL[i % len(MINIMAL)].format(t=p["topic"])})
        s1_human.append({**base, "id": f"h{i + 1:02d}", "source": "HUMAN_INTERVIEWER", "question": p["question"]})
    write(OUT / "study1" / "model.jsonl", jsonl(s1_model))
    write(OUT / "study1" / "human.jsonl", jsonl(s1_human))
    write(OUT / "study1" / "ratings.tsv",
          tsv(["rater_id", "item_id", "source", "dimension", "score", "scale_size"],
              study1_ratings(rng, [q["id"] for q in s1_model], [q["id"] for q in s1_human])))

    # --- service script ----------------------------------------------------------
    script = [{"method": "POST", "path": "/sessions", "body": {"domain": "apartment"}}]
    convo = [
        ("INTERVIEWER", "How do you find an apartment?"),
        ("INTERVIEWEE", "I mostly look on listing sites and filter by price first."),
        ("INTERVIEWER", "What happens after you filter by price?"),
        ("INTERVIEWEE", "I check how far it is from work and whether pets are allowed."),
        ("INTERVIEWER", "Why does the pet policy matter to you?"),
        ("INTERVIEWEE", "I have a dog, and last time the landlord changed the rules after I moved in."),
    ]
    for speaker, text in convo:
        script.append({"method": "POST", "path": "/sessions/s0001/turns", "body": {"speaker": speaker, "text": text}})
    script += [
        {"method": "POST", "path": "/sessions/s0001/suggestions", "body": {"k": 4}},
        {"method": "POST", "path": "/sessions/s0001/accept", "body": {"suggestion_id": "s0001.1.1"}},
        {"method": "GET", "path": "/sessions/s0001/transcript"},
    ]
    write(OUT / "service" / "script.json", json.dumps(script, indent=2) + "\n")
    write(OUT / "drafts" / "service.jsonl",
          draft([("suggest:s0001:MULTI_AVOID:-:6:0",
                  "What did you do when the landlord changed the pet rules after you moved in?")]))

    if args.seal:
        def seal(mode, name, *extra):
            subprocess.run([args.seal, mode, str(OUT / "drafts" / f"{name}.jsonl"),
                            str(OUT / "replay" / f"{name}.jsonl"), *extra], check=True)

        (OUT / "replay").mkdir(exist_ok=True)
        seal("classify", "classify", "--pairs", str(OUT / "classification" / "pairs.tsv"))
        seal("minimal", "minimal", "--pairs", str(OUT / "classification" / "pairs.tsv"))
        seal("guided", "guided", "--pairs", str(OUT / "classification" / "pairs.tsv"),
             "--flags", str(OUT / "guided" / "flags.tsv"))
        seal("multi", "multi", "--pairs", str(OUT / "classification" / "pairs.tsv"))
        seal("service", "service", "--script", str(OUT / "service" / "script.json"),
             "--golden", str(ROOT / "tests" / "golden" / "service_transcript.jsonl"))


if __name__ == "__main__":
    main()
