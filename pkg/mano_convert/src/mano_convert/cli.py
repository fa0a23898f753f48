"""mano_convert <asset> --fingertips t,i,m,r,p --out model.json"""

import argparse
import sys

from .convert import ConvertError, convert

# widely used community fingertip vertex indices for the right-hand model
# (thumb, index, middle, ring, pinky); not defined by the official release,
# so they stay overridable
DEFAULT_FINGERTIPS = (744, 320, 443, 554, 671)


def main(argv=None):
    p = argparse.ArgumentParser(
        prog="mano_convert",
        description="Convert an official-layout MANO pickle into a JSON hand model.")
    p.add_argument("asset", help="path to the official pickle asset")
    p.add_argument("--fingertips",
                   default=",".join(str(i) for i in DEFAULT_FINGERTIPS),
                   help="five comma-separated fingertip vertex indices "
                        "(thumb,index,middle,ring,pinky)")
    p.add_argument("--out", required=True, help="output JSON model path")
    p.add_argument("--name", default="mano-right")
    args = p.parse_args(argv)

    try:
        tips = [int(s) for s in args.fingertips.split(",")]
    except ValueError:
        print(f"error: --fingertips must be five integers, got {args.fingertips!r}",
              file=sys.stderr)
        return 1
    try:
        doc = convert(args.asset, tips, args.out, name=args.name)
    except ConvertError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({len(doc['template'])} vertices, "
          f"source sha256 {doc['source_sha256'][:12]}...)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
