/** Wire types mirrored from the gateway's JSON contracts. */
export {};
