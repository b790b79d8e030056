#!/usr/bin/env python3
"""Download and unpack a full log dataset (HDFS, BGL, Thunderbird).

The datasets are distributed by the loghub project,
https://github.com/logpai/loghub . Its README lists the current download
link for each archive; pass that link as --url. Nothing fetched here is
meant to be committed.

    python3 scripts/fetch_dataset.py --url <archive link> --dest datasets/HDFS
"""

import argparse
import os
import shutil
import sys
import tarfile
import urllib.request
import zipfile


def fetch(url: str, dest: str) -> str:
    os.makedirs(dest, exist_ok=True)
    name = os.path.basename(url.split("?", 1)[0]) or "download"
    path = os.path.join(dest, name)
    if not os.path.exists(path):
        print(f"downloading {url} -> {path}", file=sys.stderr)
        with urllib.request.urlopen(url) as resp, open(path + ".part", "wb") as out:
            shutil.copyfileobj(resp, out)
        os.replace(path + ".part", path)
    return path


def unpack(path: str, dest: str) -> None:
    if zipfile.is_zipfile(path):
        with zipfile.ZipFile(path) as zf:
            zf.extractall(dest)
    elif tarfile.is_tarfile(path):
        with tarfile.open(path) as tf:
            tf.extractall(dest, filter="data") if sys.version_info >= (3, 12) else tf.extractall(dest)
    else:
        print(f"{path} is not an archive; left as is", file=sys.stderr)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--url", required=True, help="archive link from the loghub README")
    ap.add_argument("--dest", required=True, help="directory to unpack into")
    args = ap.parse_args(argv)
    unpack(fetch(args.url, args.dest), args.dest)
    print(f"unpacked into {args.dest}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
