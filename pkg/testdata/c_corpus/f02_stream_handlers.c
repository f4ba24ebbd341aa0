#include "f01_h2o_stream.h"

static int handle_request_body_chunk(h2o_http2_stream_t *stream, const char *buf, size_t len)
{
    (void)buf;
    stream->body_bytes += len;
    return 0;
}

int handle_headers_frame(h2o_http2_stream_t *stream, int end_stream)
{
    if (stream->state != H2O_HTTP2_STREAM_STATE_IDLE)
        return -1;
    stream->state = H2O_HTTP2_STREAM_STATE_RECV_HEADERS;
    if (end_stream) {
        stream->state = H2O_HTTP2_STREAM_STATE_REQ_PENDING;
        return 0;
    }
    stream->state = H2O_HTTP2_STREAM_STATE_RECV_BODY;
    return 0;
}

int handle_data_frame(h2o_http2_stream_t *stream, const char *buf, size_t len, int end_stream)
{
    /* the body handler is only reachable after a valid header frame */
    if (stream->state != H2O_HTTP2_STREAM_STATE_RECV_BODY)
        return -1;
    handle_request_body_chunk(stream, buf, len);
    if (end_stream) {
        stream->state = H2O_HTTP2_STREAM_STATE_REQ_PENDING;
    }
    return 0;
}

void send_response(h2o_http2_stream_t *stream, int has_body)
{
    stream->state = H2O_HTTP2_STREAM_STATE_SEND_HEADERS;
    if (has_body) {
        stream->state = H2O_HTTP2_STREAM_STATE_SEND_BODY;
        stream->state = H2O_HTTP2_STREAM_STATE_SEND_BODY_IS_FINAL;
    }
    stream->state = H2O_HTTP2_STREAM_STATE_END_STREAM;
}
