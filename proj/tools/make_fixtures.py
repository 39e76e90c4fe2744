#!/usr/bin/env python3
"""Generate the bundled WikiSQL-format fixture corpus.

Writes tables.jsonl, train.jsonl and dev.jsonl into the target directory
(default: tests/data/fixtures). Output is deterministic for a given seed.
"""

import argparse
import json
import random
from pathlib import Path

AGG_NONE, AGG_MAX, AGG_MIN, AGG_COUNT, AGG_SUM, AGG_AVG = range(6)
OP_EQ, OP_GT, OP_LT = range(3)

# Every generated query matches at least one row.
# header, type, explicit phrasings, may be implied by its value alone
TABLES = [
    {
        "id": "1-10000-1",
        "columns": [
            ("Lane", "real", ["lane", "lanes"], False),
            ("Name", "text", ["name", "swimmer name"], True),
            ("Nationality", "text", ["nationality"], True),
            ("Split (50m)", "real", ["50m split", "50m splits", "split"], False),
            ("Time", "real", ["time", "finishing time"], False),
        ],
        "rows": [
            [1, "Sara Isakovic", "Slovenia", 27.66, 117.03],
            [2, "Josefin Lillhage", "Sweden", 26.50, 117.45],
            [3, "Federica Pellegrini", "Italy", 26.45, 115.82],
            [4, "Camelia Potec", "Romania", 27.01, 116.72],
            [5, "Pang Jiaying", "China", 26.81, 116.55],
            [6, "Katie Hoff", "United States", 27.45, 117.91],
            [7, "Caitlin McClatchey", "Great Britain", 27.12, 117.21],
            [8, "Ophelie Etienne", "France", 27.33, 118.01],
            [9, "Josefin Lillhage", "Sweden", 26.71, 118.36],
            [10, "Hanna Eriksson", "Sweden", 27.89, 119.04],
        ],
    },
    {
        "id": "1-10000-2",
        "columns": [
            ("Country", "text", ["country"], True),
            ("Capital", "text", ["capital"], True),
            ("Continent", "text", ["continent"], True),
            ("Population", "real", ["population"], False),
            ("Area", "real", ["area"], False),
        ],
        "rows": [
            ["Norway", "Oslo", "Europe", 5.4, 385207],
            ["Kenya", "Nairobi", "Africa", 53.8, 580367],
            ["Peru", "Lima", "South America", 33.0, 1285216],
            ["Japan", "Tokyo", "Asia", 125.7, 377975],
            ["Chile", "Santiago", "South America", 19.5, 756102],
            ["Ghana", "Accra", "Africa", 31.1, 238533],
            ["Austria", "Vienna", "Europe", 8.9, 83879],
            ["Nepal", "Kathmandu", "Asia", 29.1, 147516],
            ["Portugal", "Lisbon", "Europe", 10.3, 92212],
        ],
    },
    {
        "id": "1-10000-3",
        "columns": [
            ("Title", "text", ["title", "film title"], True),
            ("Director", "text", ["director"], True),
            ("Year", "real", ["year"], False),
            ("Runtime", "real", ["runtime", "running time"], False),
            ("Gross", "real", ["gross", "box office gross"], False),
        ],
        "rows": [
            ["Silent Harbor", "Mira Olsen", 1994, 112, 45.2],
            ["Silver Moons", "Dev Patel Rao", 1998, 98, 12.7],
            ["The Long Field", "Mira Olsen", 2001, 131, 88.4],
            ["Glass Rivers", "Tomas Berg", 2003, 105, 23.9],
            ["Night Orchard", "Ana Ruiz", 2007, 121, 64.0],
            ["Iron Summer", "Tomas Berg", 2010, 140, 150.3],
            ["Blue Lantern", "Ana Ruiz", 2014, 95, 8.6],
            ["Cold Meridian", "Lena Park", 2018, 117, 71.1],
        ],
    },
    {
        "id": "1-10000-4",
        "columns": [
            ("Player", "text", ["player"], True),
            ("Team", "text", ["team"], True),
            ("Position", "text", ["position"], True),
            ("Goals", "real", ["goals"], False),
            ("Games", "real", ["games", "games played"], False),
            ("Age", "real", ["age"], False),
        ],
        "rows": [
            ["Marco Vitale", "Rovers", "Forward", 21, 34, 27],
            ["Jonas Keller", "Athletic", "Midfielder", 7, 30, 24],
            ["Ivan Petrov", "Rovers", "Defender", 2, 36, 31],
            ["Luis Moreno", "United", "Forward", 18, 33, 22],
            ["Samir Haddad", "Athletic", "Forward", 12, 28, 29],
            ["Tom Fischer", "United", "Goalkeeper", 0, 38, 33],
            ["Emil Novak", "City", "Midfielder", 9, 35, 26],
            ["Kofi Mensah", "City", "Defender", 3, 31, 25],
        ],
    },
    {
        "id": "1-10000-5",
        "columns": [
            ("Model", "text", ["model"], True),
            ("Manufacturer", "text", ["manufacturer"], True),
            ("Horsepower", "real", ["horsepower"], False),
            ("Price", "real", ["price"], False),
            ("Seats", "real", ["seats"], False),
        ],
        "rows": [
            ["Aurora GT", "Velox", 310, 48500, 4],
            ["Breeze", "Solano", 120, 18900, 5],
            ["Condor X", "Velox", 420, 72000, 2],
            ["Dune Runner", "Terrano", 250, 39900, 7],
            ["Echo", "Solano", 95, 15400, 5],
            ["Falcon S", "Kestrel", 380, 66000, 2],
            ["Granite", "Terrano", 290, 45200, 7],
            ["Harbor", "Kestrel", 150, 23100, 5],
        ],
    },
    {
        "id": "1-10000-6",
        "columns": [
            ("Episode", "real", ["episode"], False),
            ("Title", "text", ["title", "episode title"], True),
            ("Directed by", "text", ["directed by"], True),
            ("Written by", "text", ["written by"], True),
            ("Viewers (millions)", "real", ["viewers", "million viewers"], False),
        ],
        "rows": [
            [1, "Pilot", "Karen Gaviola", "Greg Daniels", 11.2],
            [2, "The Return", "Rob Bailey", "Jenna Bans", 9.8],
            [3, "Crossroads", "Karen Gaviola", "Paul Zbyszewski", 10.4],
            [4, "Deep Water", "David Straiton", "Jenna Bans", 8.7],
            [5, "Last Call", "Rob Bailey", "Greg Daniels", 9.1],
            [6, "Fault Lines", "David Straiton", "Paul Zbyszewski", 7.9],
            [7, "Homecoming", "Karen Gaviola", "Jenna Bans", 10.9],
        ],
    },
    {
        "id": "1-10000-7",
        "columns": [
            ("District", "text", ["district"], True),
            ("Incumbent", "text", ["incumbent"], True),
            ("Party", "text", ["party"], True),
            ("First elected", "real", ["first elected"], False),
            ("Votes", "real", ["votes"], False),
        ],
        "rows": [
            ["Ohio 3", "Frank Miller", "Republican", 1986, 120450],
            ["Ohio 7", "Helen Cole", "Democratic", 1992, 98200],
            ["Texas 12", "Ray Dalton", "Republican", 1978, 143900],
            ["Texas 15", "Maria Ochoa", "Democratic", 2002, 87650],
            ["Iowa 2", "Paul Brandt", "Republican", 1996, 110300],
            ["Iowa 4", "Grace Lund", "Democratic", 2006, 101750],
            ["Utah 1", "Dean Sorensen", "Republican", 1990, 132800],
        ],
    },
    {
        "id": "1-10000-8",
        "columns": [
            ("Peak", "text", ["peak", "mountain peak"], True),
            ("Country", "text", ["country"], True),
            ("Elevation (m)", "real", ["elevation"], False),
            ("Prominence (m)", "real", ["prominence"], False),
            ("Range", "text", ["range", "mountain range"], True),
        ],
        "rows": [
            ["Mont Blanc", "France", 4808, 4695, "Alps"],
            ["Grossglockner", "Austria", 3798, 2424, "Alps"],
            ["Aconcagua", "Argentina", 6961, 6961, "Andes"],
            ["Ojos del Salado", "Chile", 6893, 3688, "Andes"],
            ["Elbrus", "Russia", 5642, 4741, "Caucasus"],
            ["Kazbek", "Georgia", 5054, 2353, "Caucasus"],
            ["Matterhorn", "Switzerland", 4478, 1042, "Alps"],
            ["Huascaran", "Peru", 6768, 2776, "Andes"],
        ],
    },
]

AGG_SEL = {
    AGG_NONE: ["What is the {c}", "Which {c}", "Name the {c}", "Tell me the {c}"],
    AGG_MAX: ["What is the highest {c}", "What is the maximum {c}", "What is the largest {c}"],
    AGG_MIN: ["What is the lowest {c}", "What is the minimum {c}", "What is the smallest {c}"],
    AGG_COUNT: ["How many {c} are there", "What is the number of {c}", "Count the {c}"],
    AGG_SUM: ["What is the total {c}", "What is the sum of {c}", "What is the total sum of {c}"],
    AGG_AVG: ["What is the average {c}", "What is the mean {c}"],
}

OP_COND = {
    OP_EQ: ["when {c} is {v}", "with {c} {v}", "where {c} is {v}", "for {c} {v}"],
    OP_GT: ["when {c} is above {v}", "with {c} more than {v}", "where {c} is greater than {v}",
            "with {c} over {v}"],
    OP_LT: ["when {c} is below {v}", "with {c} less than {v}", "where {c} is under {v}",
            "with {c} smaller than {v}"],
}

IMPLICIT_COND = ["for {v}", "of {v}", "with {v}"]


def fmt(x):
    if isinstance(x, float) and x.is_integer():
        return str(int(x))
    return str(x)


def table_record(t):
    return {
        "id": t["id"],
        "header": [c[0] for c in t["columns"]],
        "types": [c[1] for c in t["columns"]],
        "rows": t["rows"],
    }


def value_is_unique_to_column(t, col, value):
    """True when no other column holds a cell equal to value."""
    for j, _ in enumerate(t["columns"]):
        if j == col:
            continue
        if any(fmt(r[j]).lower() == value.lower() for r in t["rows"]):
            return False
    return True


def matching_rows(t, conds):
    def ok(row, col, op, value):
        cell = row[col]
        if op == OP_EQ:
            return fmt(cell).lower() == value.lower()
        x = float(value)
        return cell > x if op == OP_GT else cell < x
    return [r for r in t["rows"] if all(ok(r, c, o, v) for c, o, v in conds)]


def words_clash(phrase, used):
    return any(w in used for w in phrase.lower().split())


def make_example(rng, t):
    cols = t["columns"]
    ncol = len(cols)
    real_cols = [i for i, c in enumerate(cols) if c[1] == "real"]

    agg = rng.choice(range(6))
    if agg in (AGG_MAX, AGG_MIN, AGG_SUM, AGG_AVG):
        sel = rng.choice(real_cols)
    else:
        sel = rng.randrange(ncol)

    n_conds = rng.choices([0, 1, 2, 3], weights=[1, 4, 3, 1])[0]
    others = [i for i in range(ncol) if i != sel]
    rng.shuffle(others)
    cond_cols = others[:n_conds]

    row = rng.choice(t["rows"])
    sel_phrase = rng.choice(cols[sel][2])
    used = set(sel_phrase.lower().split())

    conds, cond_text = [], []
    for cc in cond_cols:
        header, ctype, phrases, implicit_ok = cols[cc]
        if ctype == "real":
            op = rng.choice([OP_EQ, OP_GT, OP_LT])
        else:
            op = OP_EQ
        value = fmt(row[cc])
        if op != OP_EQ:
            pool = sorted({r[cc] for r in t["rows"]})
            value = fmt(rng.choice(pool))
        if not matching_rows(t, conds + [[cc, op, value]]):
            continue
        phrase = rng.choice(phrases)
        if words_clash(phrase, used) or any(w in used for w in value.lower().split()):
            continue
        implicit = (op == OP_EQ and implicit_ok and rng.random() < 0.4
                    and value_is_unique_to_column(t, cc, value))
        if implicit:
            cond_text.append(rng.choice(IMPLICIT_COND).format(v=value))
        else:
            cond_text.append(rng.choice(OP_COND[op]).format(c=phrase, v=value))
            used.update(phrase.lower().split())
        used.update(value.lower().split())
        conds.append([cc, op, value])

    question = rng.choice(AGG_SEL[agg]).format(c=sel_phrase)
    if cond_text:
        question += " " + " and ".join(cond_text)
    question += "?"
    return {
        "question": question,
        "table_id": t["id"],
        "sql": {"sel": sel, "agg": agg, "conds": conds},
    }


WORKED_EXAMPLE = {
    "question": "What is the total sum of 50m splits for Josefin Lillhage in lanes above 8?",
    "table_id": "1-10000-1",
    "sql": {"sel": 3, "agg": AGG_SUM, "conds": [[1, OP_EQ, "Josefin Lillhage"], [0, OP_GT, "8"]]},
}


def generate(seed, n_train, n_dev):
    rng = random.Random(seed)
    seen = {WORKED_EXAMPLE["question"]}
    out = []
    while len(out) < n_train + n_dev - 1:
        ex = make_example(rng, rng.choice(TABLES))
        if ex["question"] in seen:
            continue
        seen.add(ex["question"])
        out.append(ex)
    train = [WORKED_EXAMPLE] + out[: n_train - 1]
    dev = out[n_train - 1:]
    return train, dev


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="tests/data/fixtures")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--train", type=int, default=320)
    ap.add_argument("--dev", type=int, default=120)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, dev = generate(args.seed, args.train, args.dev)
    write_jsonl(out / "tables.jsonl", [table_record(t) for t in TABLES])
    write_jsonl(out / "train.jsonl", train)
    write_jsonl(out / "dev.jsonl", dev)
    print(f"{len(train)} train, {len(dev)} dev, {len(TABLES)} tables -> {out}")


if __name__ == "__main__":
    main()
