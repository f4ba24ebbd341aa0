#ifndef F01_H2O_STREAM_H
#define F01_H2O_STREAM_H

#include <stddef.h>

/* stream states as implemented, finer than the RFC machine */
enum en_h2o_http2_stream_state_t {
    H2O_HTTP2_STREAM_STATE_IDLE,
    H2O_HTTP2_STREAM_STATE_RECV_HEADERS,
    H2O_HTTP2_STREAM_STATE_RECV_BODY,
    H2O_HTTP2_STREAM_STATE_REQ_PENDING,
    H2O_HTTP2_STREAM_STATE_SEND_HEADERS,
    H2O_HTTP2_STREAM_STATE_SEND_BODY,
    H2O_HTTP2_STREAM_STATE_SEND_BODY_IS_FINAL,
    H2O_HTTP2_STREAM_STATE_END_STREAM
};

typedef struct st_h2o_http2_stream_t {
    unsigned stream_id;
    enum en_h2o_http2_stream_state_t state;
    size_t body_bytes;
} h2o_http2_stream_t;

#endif
