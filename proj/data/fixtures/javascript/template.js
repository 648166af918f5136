const tpl = `multi
line // not comment /* nope */
${x + 1}`;
// real line
const re = "a/b"; /* real block */
