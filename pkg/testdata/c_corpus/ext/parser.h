struct parser {
    int fCurrentParseState;
};
