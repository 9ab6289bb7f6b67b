"""
Growing a tree on a small weather table
=======================================

Load a schema and a CSV from strings, grow a tree breadth-first and
print it. The ``?`` field is an unknown value: the case is split across
both branches with fractional weight.
"""

from farmtree import build_sequential, load_data, load_schema

schema = load_schema("""
outlook: discrete sunny,overcast,rain
temp: continuous
windy: discrete yes,no
class: play,stay
""")

rows = """\
sunny,30,no,stay
sunny,27,yes,stay
overcast,28,no,play
rain,21,no,play
rain,18,yes,stay
overcast,17,yes,play
sunny,22,no,stay
sunny,19,no,play
rain,23,no,play
sunny,24,yes,play
overcast,?,yes,play
overcast,29,no,play
rain,22,yes,stay
"""
ts = load_data(schema, rows)
print(ts.case_count, "cases,", ts.n_attributes, "attributes")

# continuous columns are stored as ranks into a sorted table of distinct values
print("temp values:", ts.sorted_values[1])

tree = build_sequential(ts)
print(tree.to_text())
print(f"{tree.node_count} nodes, {tree.leaf_count} leaves, depth {tree.depth}")

# every case lands in some leaf; training error of an unpruned tree is small
wrong = sum(tree.predict(i) != ts.class_column[i] for i in range(ts.case_count))
print("training errors:", wrong)
