from .messages import (
    Message,
    FrameTooLarge,
    MalformedPayload,
    MESSAGE_TYPES,
    MAX_FRAME_BYTES,
    encode,
    decode,
    encode_body,
    decode_body,
    validate_payload,
)
from .state import SessionState, ClientInfo, Role, handle_message, register_client, drop_client
from .server import SyncServer, ServerConfig, BindFailure, serve
from .client import TcpSyncClient

__all__ = [
    "Message",
    "FrameTooLarge",
    "MalformedPayload",
    "MESSAGE_TYPES",
    "MAX_FRAME_BYTES",
    "encode",
    "decode",
    "encode_body",
    "decode_body",
    "validate_payload",
    "SessionState",
    "ClientInfo",
    "Role",
    "handle_message",
    "register_client",
    "drop_client",
    "SyncServer",
    "ServerConfig",
    "BindFailure",
    "serve",
    "TcpSyncClient",
]
