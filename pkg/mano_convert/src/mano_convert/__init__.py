from .convert import (ConvertError, SchemaEmitError, UnreadableAsset, convert,
                      convert_dict, load_asset)

__version__ = "0.1.0"
