"""Reference implementation of the rationeval model wire protocol.

Wraps a sentiment classifier behind newline-delimited JSON on stdio or
HTTP: the server speaks a hello first, then answers predict requests with
positive-class probabilities, echoing request ids.  Errors travel in-band
as error messages; the loop never dies on a bad request.
"""

__version__ = "0.1.0"
