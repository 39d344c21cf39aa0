"""Load emitted ontologies with owlready2 and print what it sees.

Usage: python3 scripts/owl_smoke.py FILE.owl [FILE.owl ...]
Exits non-zero if any file fails to load.
"""

import sys

import owlready2


def main(paths):
    failed = 0
    for path in paths:
        try:
            world = owlready2.World()
            onto = world.get_ontology("file://" + path).load()
        except Exception as exc:  # noqa: BLE001
            print(f"{path}: FAILED to load: {exc}")
            failed += 1
            continue
        print(
            f"{path}: loaded; classes={len(list(onto.classes()))} "
            f"object_properties={len(list(onto.object_properties()))} "
            f"data_properties={len(list(onto.data_properties()))} "
            f"individuals={len(list(onto.individuals()))}"
        )
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main([p for p in sys.argv[1:]]))
