PRODUCT_TABLE_ATTRIBUTES = ("B", "E", "D", "A", "C")

PRODUCT_TABLE_ROWS = [
    ("z", "q", "u", "x", "y"),
    ("y", "q", "u", "x", "y"),
    ("y", "r", "v", "x", "z"),
    ("z", "r", "v", "x", "z"),
    ("y", "p", "u", "x", "x"),
    ("z", "p", "u", "x", "x"),
]

PRODUCT_TABLE_CSV = "B,E,D,A,C\n" + "\n".join(",".join(row) for row in PRODUCT_TABLE_ROWS) + "\n"

# Factor tables as {attribute: value} rows; the constant column A=x sits in the smaller one.
FACTOR_T1 = [{"A": "x", "B": "y"}, {"A": "x", "B": "z"}]
FACTOR_T2 = [
    {"C": "x", "D": "u", "E": "p"},
    {"C": "y", "D": "u", "E": "q"},
    {"C": "z", "D": "v", "E": "r"},
]
