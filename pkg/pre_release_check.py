#!/usr/bin/env python3
"""
Smoke checks to run before tagging a release
"""

import glob
import os
import sys

from config import DEFAULT_MAPS_DIR

REQUIRED_FILES = [
    "requirements.txt",
    "config.py",
    "utils.py",
    "posmap.py",
    os.path.join(DEFAULT_MAPS_DIR, "identity.map"),
    os.path.join(DEFAULT_MAPS_DIR, "transpose.map"),
]


def check_imports():
    """Check that the numeric stack and toolkit modules import"""
    print("🔍 Checking imports...")

    modules = ["numpy", "pandas", "json5", "dotenv",
               "matrix_core", "map_calculus", "positivity", "cones", "map_files", "verify_suites"]
    for name in modules:
        try:
            __import__(name)
            print(f"✅ {name} imported successfully")
        except ImportError as e:
            print(f"❌ {name} import failed: {e}")
            return False

    return True


def check_data_files(root="."):
    """Check that shipped files exist"""
    print("\n📁 Checking data files...")

    for file in REQUIRED_FILES:
        if os.path.exists(os.path.join(root, file)):
            print(f"✅ {file} exists")
        else:
            print(f"❌ {file} missing")
            return False

    return True


def check_map_files(root="."):
    """Check that every shipped map file parses"""
    print("\n🗺  Checking map files...")

    from errors import PosmapError
    from map_files import parse_map_file

    paths = sorted(glob.glob(os.path.join(root, DEFAULT_MAPS_DIR, "*.map")))
    if not paths:
        print("❌ No map files found")
        return False
    for path in paths:
        try:
            phi = parse_map_file(path)
            print(f"✅ {os.path.basename(path)}: {phi!r}")
        except PosmapError as e:
            print(f"❌ {path}: {e}")
            return False

    return True


def check_transpose_witness(root="."):
    """check-cp on the transpose must fail with eigenvalue -1"""
    print("\n🧪 Checking a known witness...")

    from map_files import parse_map_file
    from positivity import is_cp

    verdict = is_cp(parse_map_file(os.path.join(root, DEFAULT_MAPS_DIR, "transpose.map")))
    if verdict.falsified and abs(verdict.value + 1.0) < 1e-9:
        print(f"✅ transpose falsified with eigenvalue {verdict.value:.12g}")
        return True
    print(f"❌ unexpected verdict {verdict.status.value} ({verdict.value})")
    return False


def main(root="."):
    """Run all checks"""
    print("🚀 Pre-Release Check")
    print("=" * 40)

    checks = [
        ("Import Checks", check_imports),
        ("Data File Checks", lambda: check_data_files(root)),
        ("Map File Checks", lambda: check_map_files(root)),
        ("Witness Checks", lambda: check_transpose_witness(root)),
    ]

    passed = 0
    total = len(checks)

    for check_name, check_func in checks:
        print(f"\n📋 {check_name}")
        print("-" * len(check_name))

        if check_func():
            passed += 1
            print(f"✅ {check_name} PASSED")
        else:
            print(f"❌ {check_name} FAILED")

    print("\n" + "=" * 40)
    print(f"📊 Results: {passed}/{total} checks passed")

    if passed == total:
        print("🎉 All checks passed.")
        return True
    print("❌ Some checks failed.")
    return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
